"""Reduction of multivariate continuous data to multinomial data.

Points are mapped into the unit cube (componentwise standard normal CDF, or
the identity for data already in the cube), then assigned to one of
``kappa**d`` equal hypercubes.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from .exceptions import DomainError, ParameterError

DEFAULT_KAPPA = 4


class Transform(str, enum.Enum):
    GAUSS_CDF = "gausscdf"
    NONE = "none"


class SmoothnessClass(str, enum.Enum):
    HOLDER = "holder"
    BESOV = "besov"


@dataclass(frozen=True)
class BinningSpec:
    d: int
    kappa: int = DEFAULT_KAPPA
    transform: Transform = Transform.GAUSS_CDF

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise ParameterError(f"dimension must be a positive integer, got {self.d}")
        if int(self.kappa) != self.kappa or self.kappa < 1:
            raise ParameterError(f"kappa must be a positive integer, got {self.kappa}")
        object.__setattr__(self, "transform", Transform(self.transform))

    @property
    def k(self) -> int:
        return self.kappa**self.d


@dataclass(frozen=True)
class SmoothnessSpec:
    s: float
    d: int
    smoothness_class: SmoothnessClass = SmoothnessClass.HOLDER

    def __post_init__(self):
        if not self.s > 0:
            raise ParameterError(f"smoothness must be positive, got {self.s}")
        if self.d < 1:
            raise ParameterError(f"dimension must be >= 1, got {self.d}")
        object.__setattr__(self, "smoothness_class", SmoothnessClass(self.smoothness_class))


def normal_cdf(x):
    """Standard normal CDF via the complementary error function."""
    arr = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise ParameterError("normal_cdf needs finite input")
    out = 0.5 * erfc(-arr / math.sqrt(2.0))
    return float(out) if out.ndim == 0 else out


def transform_to_unit_cube(x, spec: BinningSpec) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if spec.transform is Transform.GAUSS_CDF:
        return normal_cdf(x)
    if np.any(x < 0) or np.any(x > 1) or not np.all(np.isfinite(x)):
        raise DomainError("identity transform needs inputs inside [0, 1]^d")
    return x


def bin_index(u, kappa: int):
    """Row-major hypercube index of point(s) ``u`` in ``[0, 1]^d``.

    The top face ``u_j = 1`` belongs to the last bin along that axis.
    Accepts a single point or an ``(n, d)`` matrix.
    """
    u = np.asarray(u, dtype=np.float64)
    single = u.ndim == 1
    u = np.atleast_2d(u)
    if np.any(u < 0) or np.any(u > 1) or not np.all(np.isfinite(u)):
        raise DomainError("bin_index needs points inside [0, 1]^d")
    per_dim = np.minimum(np.floor(u * kappa).astype(np.int64), kappa - 1)
    d = u.shape[1]
    weights = kappa ** np.arange(d - 1, -1, -1, dtype=np.int64)
    idx = per_dim @ weights
    return int(idx[0]) if single else idx


def bin_dataset(points, spec: BinningSpec) -> np.ndarray:
    points = np.asarray(points, dtype=np.float64)
    if points.ndim == 1:
        points = points[:, None] if spec.d == 1 else points[None, :]
    if points.shape[1] != spec.d:
        raise ParameterError(f"points have dimension {points.shape[1]}, spec says {spec.d}")
    return bin_index(transform_to_unit_cube(points, spec), spec.kappa)


def kappa_upper_bound(n1: int, alpha: float, s: float, d: int) -> float:
    return min(n1 ** (2.0 / (4.0 * s + d)), (n1 * alpha**2) ** (2.0 / (4.0 * s + 3.0 * d)))


def theoretical_kappa(n1: int, alpha: float, spec: SmoothnessSpec) -> int:
    """Sample-size dependent number of bins per side for known smoothness."""
    if n1 < 2 or not alpha > 0:
        raise ParameterError("need n1 >= 2 and alpha > 0")
    bound = kappa_upper_bound(n1, alpha, spec.s, spec.d)
    if spec.smoothness_class is SmoothnessClass.BESOV:
        if bound < 2:
            return 1
        j = math.floor(math.log2(bound))
        # guard the log2 rounding at exact powers of two
        while 2 ** (j + 1) <= bound:
            j += 1
        while 2**j > bound:
            j -= 1
        return 2**j
    return max(1, math.floor(bound))
