"""Smoothness-adaptive multiscale private density test.

Runs ``N`` binned density tests with ``2, 4, ..., 2**N`` bins per side. Each
sub-test uses a fresh release at budget ``alpha / N`` and level ``gamma / N``,
and the null is rejected when any sub-test rejects. Composition gives total
budget ``alpha``, and the union bound gives level ``gamma``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .density import BinningSpec, Transform
from .exceptions import ParameterError
from .mechanisms import Mechanism, PrivacyConfig
from .procedures import Calibration, TestResult, bonferroni_pvalue, check_combination, density_test
from .sampling import StreamKey
from .statistics import StatisticKind

MIN_N1 = 16


@dataclass(frozen=True)
class AdaptivePlan:
    n_tests: int
    alpha: float
    gamma: float

    @property
    def per_test_alpha(self) -> float:
        return self.alpha / self.n_tests

    @property
    def per_test_gamma(self) -> float:
        return self.gamma / self.n_tests

    @property
    def kappas(self) -> tuple[int, ...]:
        return tuple(2**t for t in range(1, self.n_tests + 1))


def adaptive_test_count(n1: int, alpha: float, d: int) -> int:
    """Number of Bonferroni sub-tests; inner logs natural, outer base 2."""
    if n1 < MIN_N1:
        raise ParameterError(f"adaptive test needs n1 >= {MIN_N1}, got {n1}")
    if not alpha > 0 or d < 1:
        raise ParameterError("need alpha > 0 and d >= 1")
    log_n = math.log(n1)
    loglog_n = math.log(log_n)
    first = (2.0 / d) * math.log2(n1 / loglog_n)
    ratio = n1 * alpha**2 / (log_n**2 * loglog_n)
    second = (2.0 / (3.0 * d)) * math.log2(ratio)
    return max(1, math.ceil(min(first, second)))


def plan_adaptive(n1: int, alpha: float, gamma: float, d: int) -> AdaptivePlan:
    return AdaptivePlan(adaptive_test_count(n1, alpha, d), alpha, gamma)


def _as_points(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    return x[:, None] if x.ndim == 1 else x


def adaptive_density_test(y_points, z_points, alpha: float, gamma: float, B: int, mechanism,
                          key: StreamKey, stat=StatisticKind.L2U,
                          transform=Transform.GAUSS_CDF, workers: int = 1) -> TestResult:
    """Multiscale density test; sub-test ``t`` reads substream ``t`` of ``key``."""
    mechanism = Mechanism.parse(mechanism)
    check_combination(mechanism, stat, Calibration.PERMUTATION)
    y_points, z_points = _as_points(y_points), _as_points(z_points)
    d = y_points.shape[1]
    plan = plan_adaptive(len(y_points), alpha, gamma, d)
    subs = []
    for t, kappa in enumerate(plan.kappas, start=1):
        spec = BinningSpec(d=d, kappa=kappa, transform=transform)
        cfg = PrivacyConfig(mechanism, plan.per_test_alpha, max(spec.k, 2))
        subs.append(density_test(y_points, z_points, spec, cfg, stat, plan.per_test_gamma, B,
                                 key.child(t), workers=workers))
    best = min(subs, key=lambda r: r.p_value)
    return TestResult(
        statistic=best.statistic,
        p_value=bonferroni_pvalue([r.p_value for r in subs], plan.n_tests),
        reject=any(r.reject for r in subs),
        calibration=Calibration.PERMUTATION,
        B=B,
        gamma=gamma,
        mechanism=mechanism,
        statistic_kind=StatisticKind.parse(stat),
        seed=int(key.master_seed),
        sub_results=subs,
    )
