"""Permutation calibration of two-sample statistics.

All supported statistics are invariant to the order of rows within a group,
so a permutation is realised as a uniform random group reassignment: the
``n1`` pooled rows carrying the smallest uniform keys become group Y. The keys
of permutation ``b`` come from substream ``b`` of the caller's key, which
makes the result independent of chunking and worker count.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .exceptions import ParameterError, SizeError
from .sampling import StreamKey, uniform_block
from .statistics import BatchEvaluator, StatisticKind

# Ties are decided up to this relative tolerance, so that mathematically
# equal statistics reached through different rounding still count as ties.
TIE_RTOL = 1e-12
CHUNK = 512


@dataclass(frozen=True)
class PermutationResult:
    observed: float
    p_value: float
    B: int
    exceed_count: int


def _tolerance(evaluator: BatchEvaluator, observed: float) -> float:
    return TIE_RTOL * max(evaluator.scale, abs(observed))


def permutation_masks(key: StreamKey, start: int, stop: int, n: int, n1: int) -> np.ndarray:
    """Group-Y masks for permutations ``start..stop-1``; shape ``(stop-start, n)``."""
    u = uniform_block(key, np.arange(start, stop), n)
    chosen = np.argpartition(u, n1 - 1, axis=1)[:, :n1]
    masks = np.zeros(u.shape, dtype=bool)
    np.put_along_axis(masks, chosen, True, axis=1)
    return masks


def mc_permutation_pvalue(views, statistic, B: int, key: StreamKey, workers: int = 1) -> PermutationResult:
    """Monte-Carlo permutation p-value ``(1 + #{T_b >= T_obs}) / (B + 1)``."""
    if int(B) != B or B < 0:
        raise ParameterError(f"B must be a non-negative integer, got {B}")
    B = int(B)
    ev = BatchEvaluator(views.rows, views.n1, StatisticKind.parse(statistic))
    t_obs = ev.observed()
    threshold = t_obs - _tolerance(ev, t_obs)

    def count(start: int) -> int:
        masks = permutation_masks(key, start, min(start + CHUNK, B), ev.n, ev.n1)
        return int(np.count_nonzero(ev.evaluate(masks) >= threshold))

    starts = range(0, B, CHUNK)
    if workers > 1 and B > CHUNK:
        with ThreadPoolExecutor(workers) as pool:
            exceed = sum(pool.map(count, starts))
    else:
        exceed = sum(count(s) for s in starts)
    return PermutationResult(t_obs, (1 + exceed) / (B + 1), B, exceed)


def exact_permutation_pvalue(views, statistic, max_choose: int = 200_000) -> float:
    """Exact p-value over all ``C(n, n1)`` distinct group assignments."""
    n, n1 = views.n, views.n1
    total = math.comb(n, n1)
    if total > max_choose:
        raise SizeError(f"C({n}, {n1}) = {total} exceeds the enumeration budget {max_choose}")
    ev = BatchEvaluator(views.rows, n1, StatisticKind.parse(statistic))
    t_obs = ev.observed()
    threshold = t_obs - _tolerance(ev, t_obs)
    combos = itertools.combinations(range(n), n1)
    hits = 0
    while True:
        block = list(itertools.islice(combos, 4096))
        if not block:
            break
        masks = np.zeros((len(block), n), dtype=bool)
        np.put_along_axis(masks, np.array(block), True, axis=1)
        hits += int(np.count_nonzero(ev.evaluate(masks) >= threshold))
    return hits / total
