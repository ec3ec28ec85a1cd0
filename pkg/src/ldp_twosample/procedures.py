"""End-to-end private two-sample tests.

``multinomial_test`` privatizes every owner once and calibrates the chosen
statistic either by permutation or by the asymptotic chi-square law.
``density_test`` bins continuous data first and then runs the multinomial test.
"""

from __future__ import annotations

import dataclasses
import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammainc, gammaincc

from .density import BinningSpec, bin_dataset
from .exceptions import ConfigurationError, ParameterError
from .mechanisms import Mechanism, PrivacyConfig, PrivateViewMatrix, privatize
from .permutation import mc_permutation_pvalue
from .sampling import StreamKey, derive_stream
from .statistics import StatisticKind, compute_statistic


class Calibration(str, enum.Enum):
    PERMUTATION = "perm"
    ASYMPTOTIC = "asymptotic"

    @classmethod
    def parse(cls, value) -> Calibration:
        if isinstance(value, cls):
            return value
        v = str(value).lower()
        v = {"permutation": "perm", "asymptoticchisq": "asymptotic", "asymp": "asymptotic"}.get(v, v)
        try:
            return cls(v)
        except ValueError:
            raise ParameterError(f"unknown calibration {value!r}") from None


# statistics that only make sense on one mechanism's output
_STATISTIC_MECHANISM = {
    StatisticKind.CHI: Mechanism.GENRR,
    StatisticKind.PROJCHI: Mechanism.RAPPOR,
}


@dataclass
class TestResult:
    __test__ = False  # not a pytest class

    statistic: float
    p_value: float
    reject: bool
    calibration: Calibration
    B: int
    gamma: float
    mechanism: Mechanism
    statistic_kind: StatisticKind
    seed: int
    sub_results: list[TestResult] | None = field(default=None)

    @property
    def method(self) -> str:
        return f"{self.mechanism.value}+{self.statistic_kind.value}"

    def to_dict(self) -> dict:
        out = {
            "statistic": self.statistic,
            "p_value": self.p_value,
            "reject": bool(self.reject),
            "B": self.B,
            "seed": self.seed,
            "method": self.method,
            "calibration": self.calibration.value,
            "gamma": self.gamma,
        }
        if self.sub_results is not None:
            out["sub_results"] = [r.to_dict() for r in self.sub_results]
        return out


def check_combination(mechanism, statistic, calibration):
    mechanism = Mechanism.parse(mechanism)
    statistic = StatisticKind.parse(statistic)
    calibration = Calibration.parse(calibration)
    required = _STATISTIC_MECHANISM.get(statistic)
    if required is not None and mechanism is not required:
        raise ConfigurationError(f"{statistic.value} is defined for {required.value} views only")
    if calibration is Calibration.ASYMPTOTIC and required is None:
        raise ConfigurationError(
            "asymptotic calibration is available for genrr+chi and rappor+projchi only")
    return mechanism, statistic, calibration


def chisq_cdf(x, dof: int):
    return gammainc(dof / 2.0, np.maximum(x, 0.0) / 2.0)


def chisq_sf(x, dof: int):
    return gammaincc(dof / 2.0, np.maximum(x, 0.0) / 2.0)


def chisq_quantile(p: float, dof: int, tol: float = 1e-10) -> float:
    """Chi-square quantile by bisection on the regularized incomplete gamma."""
    if not 0.0 < p < 1.0:
        raise ParameterError(f"quantile level must lie in (0, 1), got {p}")
    if int(dof) != dof or dof < 1:
        raise ParameterError(f"degrees of freedom must be a positive integer, got {dof}")
    lo, hi = 0.0, max(1.0, float(dof))
    while chisq_cdf(hi, dof) < p:
        lo, hi = hi, 2.0 * hi
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if chisq_cdf(mid, dof) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def asymptotic_decision(t: float, k: int, gamma: float) -> tuple[float, bool]:
    """Chi-square(k-1) tail probability and the strict-exceedance decision."""
    dof = k - 1
    reject = gamma >= 1.0 or t > chisq_quantile(1.0 - gamma, dof)
    return float(chisq_sf(t, dof)), bool(reject)


def _seed_of(key: StreamKey) -> int:
    return int(key.master_seed)


def calibrate_views(views: PrivateViewMatrix, cfg: PrivacyConfig, statistic, calibration,
                    gamma: float, B: int, key: StreamKey, workers: int = 1) -> TestResult:
    """Test already-privatized pooled views."""
    mechanism, statistic, calibration = check_combination(cfg.mechanism, statistic, calibration)
    if not 0.0 < gamma <= 1.0:
        raise ParameterError(f"level gamma must lie in (0, 1], got {gamma}")
    if calibration is Calibration.PERMUTATION:
        res = mc_permutation_pvalue(views, statistic, B, key, workers=workers)
        return TestResult(res.observed, res.p_value, res.p_value <= gamma, calibration, res.B,
                          gamma, mechanism, statistic, _seed_of(key))
    t = compute_statistic(statistic, views.rows, views.n1)
    p_value, reject = asymptotic_decision(t, views.k, gamma)
    return TestResult(t, p_value, reject, calibration, 0, gamma, mechanism, statistic, _seed_of(key))


def privatize_groups(y_cats, z_cats, cfg: PrivacyConfig, key: StreamKey) -> PrivateViewMatrix:
    pooled = np.concatenate([np.asarray(y_cats), np.asarray(z_cats)]).astype(np.int64)
    rows = privatize(pooled, cfg, derive_stream(key))
    return PrivateViewMatrix(rows, len(y_cats), cfg.mechanism)


def multinomial_test(y_cats, z_cats, k: int, cfg: PrivacyConfig, stat, calibration, gamma: float,
                     B: int, key: StreamKey, workers: int = 1) -> TestResult:
    """Privatize both samples under ``cfg`` and run the calibrated test.

    The privatization reads substream 0 of ``key`` and the permutations read
    substream 1.
    """
    if cfg.k != k:
        raise ParameterError(f"privacy config is for k={cfg.k}, data has k={k}")
    check_combination(cfg.mechanism, stat, calibration)
    views = privatize_groups(y_cats, z_cats, cfg, key.child(0))
    result = calibrate_views(views, cfg, stat, calibration, gamma, B, key.child(1), workers)
    return dataclasses.replace(result, seed=_seed_of(key))


def density_test(y_points, z_points, spec: BinningSpec, cfg: PrivacyConfig, stat, gamma: float,
                 B: int, key: StreamKey, calibration=Calibration.PERMUTATION,
                 workers: int = 1) -> TestResult:
    """Bin both point sets into ``kappa**d`` cells and test the multinomials.

    ``cfg.k`` is replaced by the cell count of ``spec``.
    """
    y_cats = bin_dataset(y_points, spec)
    z_cats = bin_dataset(z_points, spec)
    cfg = dataclasses.replace(cfg, k=spec.k)
    return multinomial_test(y_cats, z_cats, spec.k, cfg, stat, calibration, gamma, B, key, workers)


def bonferroni_pvalue(p_values, n_tests: int) -> float:
    return min(1.0, n_tests * min(p_values))


__all__ = [
    "Calibration", "TestResult", "check_combination", "chisq_cdf", "chisq_sf", "chisq_quantile",
    "asymptotic_decision",
    "calibrate_views", "privatize_groups", "multinomial_test", "density_test", "bonferroni_pvalue",
]
