"""Local differential privacy mechanisms for multinomial data.

Four non-interactive mechanisms, all with identical marginals across owners:

* ``LAPU``      scaled one-hot plus continuous Laplace noise,
* ``DISCLAPU``  scaled one-hot plus discrete Laplace noise,
* ``RAPPOR``    independent bit flips of the one-hot encoding,
* ``GENRR``     generalized randomized response on the category itself.

The privatizers accept a single category or a 1-D array of categories and
return one view per category.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import ParameterError, UnsupportedMechanismError
from .sampling import laplace_inverse_cdf, sample_discrete_laplace

# Laplace scale giving unit variance
_UNIT_LAPLACE_SCALE = 1.0 / math.sqrt(2.0)


class Mechanism(str, enum.Enum):
    LAPU = "lapu"
    DISCLAPU = "disclapu"
    RAPPOR = "rappor"
    GENRR = "genrr"

    @classmethod
    def parse(cls, value) -> Mechanism:
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ParameterError(f"unknown mechanism {value!r}") from None


@dataclass(frozen=True)
class PrivacyConfig:
    mechanism: Mechanism
    alpha: float
    k: int

    def __post_init__(self):
        object.__setattr__(self, "mechanism", Mechanism.parse(self.mechanism))
        if not (math.isfinite(self.alpha) and self.alpha >= 0):
            raise ParameterError(f"privacy budget alpha must be positive, got {self.alpha}")
        # alpha = 0 is only meaningful for the flip/response mechanisms
        if self.alpha == 0 and self.mechanism in (Mechanism.LAPU, Mechanism.DISCLAPU):
            raise ParameterError("alpha must be > 0 for additive-noise mechanisms")
        if int(self.k) != self.k or self.k < 2:
            raise ParameterError(f"category count k must be an integer >= 2, got {self.k}")
        object.__setattr__(self, "k", int(self.k))

    @property
    def params(self) -> MechanismParams:
        return derive_params(self)


@dataclass(frozen=True)
class MechanismParams:
    sigma_alpha: float
    zeta_alpha: float
    alpha_bf: float
    lambda_bf: float
    w_genrr: float


def derive_params(cfg: PrivacyConfig) -> MechanismParams:
    a, k = cfg.alpha, cfg.k
    sigma = 2.0 * math.sqrt(2.0 * k) / a if a > 0 else math.inf
    zeta = math.exp(-a / (2.0 * math.sqrt(k)))
    h = math.exp(a / 2.0)
    return MechanismParams(
        sigma_alpha=sigma,
        zeta_alpha=zeta,
        alpha_bf=(h - 1.0) / (h + 1.0),
        lambda_bf=1.0 / (h + 1.0),
        w_genrr=math.expm1(a) / (math.exp(a) + k - 1.0),
    )


def _categories(x, k: int) -> tuple[np.ndarray, bool]:
    scalar = np.ndim(x) == 0
    arr = np.atleast_1d(np.asarray(x))
    if arr.ndim != 1:
        raise ParameterError("categories must be a scalar or a 1-D array")
    if arr.size and (not np.issubdtype(arr.dtype, np.integer)):
        if not np.all(arr == np.floor(arr)):
            raise ParameterError("categories must be integers")
        arr = arr.astype(np.int64)
    if arr.size and (arr.min() < 0 or arr.max() >= k):
        raise ParameterError(f"category index out of range [0, {k})")
    return arr.astype(np.int64), scalar


def one_hot(x, k: int) -> np.ndarray:
    """Unscaled indicator encoding; a matrix for array input."""
    arr, scalar = _categories(x, k)
    out = np.zeros((arr.size, k))
    out[np.arange(arr.size), arr] = 1.0
    return out[0] if scalar else out


def privatize_lapu(x, cfg: PrivacyConfig, stream) -> np.ndarray:
    arr, scalar = _categories(x, cfg.k)
    u = stream.uniform((arr.size, cfg.k))
    noise = laplace_inverse_cdf(u, _UNIT_LAPLACE_SCALE)
    views = math.sqrt(cfg.k) * one_hot(arr, cfg.k) + cfg.params.sigma_alpha * noise
    return views[0] if scalar else views


def privatize_disclapu(x, cfg: PrivacyConfig, stream) -> np.ndarray:
    """Scaled one-hot plus unscaled discrete Laplace noise with parameter zeta_alpha.

    The ratio bound holds for the pmf formula shifted by ``sqrt(k)``. When
    ``sqrt(k)`` is not an integer the two shifts live on different lattices,
    so the fractional part of an output reveals whether a coordinate was hot.
    """
    arr, scalar = _categories(x, cfg.k)
    noise = sample_discrete_laplace(cfg.params.zeta_alpha, stream, size=(arr.size, cfg.k))
    views = math.sqrt(cfg.k) * one_hot(arr, cfg.k) + noise
    return views[0] if scalar else views


def privatize_rappor(x, cfg: PrivacyConfig, stream) -> np.ndarray:
    arr, scalar = _categories(x, cfg.k)
    bits = one_hot(arr, cfg.k)
    flip = stream.uniform((arr.size, cfg.k)) < cfg.params.lambda_bf
    views = np.where(flip, 1.0 - bits, bits)
    return views[0] if scalar else views


def privatize_genrr(x, cfg: PrivacyConfig, stream):
    """Returns privatized category indices (not one-hot)."""
    arr, scalar = _categories(x, cfg.k)
    k = cfg.k
    # P(keep) = e^a / (e^a + k - 1); otherwise uniform over the other k-1 labels
    p_keep = 1.0 / (1.0 + (k - 1) * math.exp(-cfg.alpha))
    u = stream.uniform(arr.size)
    keep = u < p_keep
    v = (u - p_keep) / (1.0 - p_keep)
    j = np.minimum(np.floor(v * (k - 1)).astype(np.int64), k - 2)
    moved = np.where(j >= arr, j + 1, j)
    out = np.where(keep, arr, moved)
    return int(out[0]) if scalar else out


_PRIVATIZERS = {
    Mechanism.LAPU: privatize_lapu,
    Mechanism.DISCLAPU: privatize_disclapu,
    Mechanism.RAPPOR: privatize_rappor,
    Mechanism.GENRR: privatize_genrr,
}


def privatize(x, cfg: PrivacyConfig, stream) -> np.ndarray:
    """Dense ``n x k`` view matrix for any mechanism (GenRR as one-hot rows)."""
    views = _PRIVATIZERS[cfg.mechanism](np.atleast_1d(x), cfg, stream)
    if cfg.mechanism is Mechanism.GENRR:
        return one_hot(views, cfg.k)
    return views


@dataclass
class PrivateViewMatrix:
    """Pooled privatized views; rows ``[0, n1)`` form sample Y."""

    rows: np.ndarray
    n1: int
    mechanism: Mechanism | None = None

    def __post_init__(self):
        self.rows = np.asarray(self.rows, dtype=np.float64)
        if self.rows.ndim != 2:
            raise ParameterError("view rows must form a 2-D matrix")
        if not 1 <= self.n1 < self.rows.shape[0]:
            raise ParameterError(f"need 1 <= n1 < n, got n1={self.n1}, n={self.rows.shape[0]}")

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def n2(self) -> int:
        return self.n - self.n1

    @property
    def k(self) -> int:
        return self.rows.shape[1]

    @property
    def y(self) -> np.ndarray:
        return self.rows[: self.n1]

    @property
    def z(self) -> np.ndarray:
        return self.rows[self.n1 :]

    @classmethod
    def from_groups(cls, y_views, z_views, mechanism=None) -> PrivateViewMatrix:
        y_views = np.asarray(y_views, dtype=np.float64)
        return cls(np.vstack([y_views, np.asarray(z_views, dtype=np.float64)]), len(y_views), mechanism)


def additive_log_likelihood(output, x: int, cfg: PrivacyConfig) -> float:
    """Log conditional density (LapU) or shifted-pmf formula (DiscLapU) of a view."""
    output = np.asarray(output, dtype=np.float64)
    shift = np.zeros(cfg.k)
    shift[x] = math.sqrt(cfg.k)
    r = np.abs(output - shift)
    p = cfg.params
    if cfg.mechanism is Mechanism.LAPU:
        b = p.sigma_alpha * _UNIT_LAPLACE_SCALE
        return float(-(r / b).sum() - cfg.k * math.log(2.0 * b))
    if cfg.mechanism is Mechanism.DISCLAPU:
        z = p.zeta_alpha
        return float(r.sum() * math.log(z) + cfg.k * math.log((1.0 - z) / (1.0 + z)))
    raise UnsupportedMechanismError("additive likelihood is defined for lapu and disclapu only")


def _rappor_log_pmf(outputs: np.ndarray, x: int, alpha: float) -> np.ndarray:
    keep = math.exp(alpha / 2.0) / (math.exp(alpha / 2.0) + 1.0)
    e = np.zeros(outputs.shape[1])
    e[x] = 1.0
    agree = (outputs == e).sum(axis=1)
    disagree = outputs.shape[1] - agree
    return agree * math.log(keep) + disagree * math.log1p(-keep)


def exact_privacy_ratio(cfg: PrivacyConfig) -> float:
    """Largest conditional-probability ratio over outputs and input pairs.

    Brute force over the full output space; discrete mechanisms only.
    Single outputs suffice since any event ratio is bounded by the worst one.
    """
    k, a = cfg.k, cfg.alpha
    if cfg.mechanism is Mechanism.GENRR:
        denom = math.exp(a) + k - 1.0
        pmf = np.full((k, k), 1.0 / denom)  # pmf[x, out]
        np.fill_diagonal(pmf, math.exp(a) / denom)
        ratios = pmf[:, None, :] / pmf[None, :, :]
        return float(ratios.max())
    if cfg.mechanism is Mechanism.RAPPOR:
        if k > 12:
            raise ParameterError("RAPPOR brute force is limited to k <= 12")
        outputs = np.array(list(itertools.product((0.0, 1.0), repeat=k)))
        logp = np.stack([_rappor_log_pmf(outputs, x, a) for x in range(k)])
        worst = max(float(np.max(logp[i] - logp[j])) for i in range(k) for j in range(k))
        return math.exp(worst)
    raise UnsupportedMechanismError(
        f"exact privacy ratio is defined for discrete-output mechanisms only, not {cfg.mechanism.value}"
    )
