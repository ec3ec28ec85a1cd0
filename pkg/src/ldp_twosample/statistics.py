"""Two-sample statistics on privatized views.

``L2U`` is the l2 U-statistic, usable with every mechanism. ``CHI`` is the
pooled chi-square statistic on generalized-randomized-response categories, and
``PROJCHI`` is the projected Hotelling-type statistic on RAPPOR bit vectors.

Each statistic has a batched form over group assignments, driven by
``GroupSums``. The permutation engine relies on it, since every statistic
depends on the assignment only through within-group sums.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .exceptions import DegenerateSampleError, ParameterError

PINV_RTOL = 1e-10


class StatisticKind(str, enum.Enum):
    L2U = "l2"
    CHI = "chi"
    PROJCHI = "projchi"

    @classmethod
    def parse(cls, value) -> StatisticKind:
        if isinstance(value, cls):
            return value
        aliases = {"l2u": "l2", "u": "l2", "proj_chi": "projchi"}
        v = str(value).lower()
        try:
            return cls(aliases.get(v, v))
        except ValueError:
            raise ParameterError(f"unknown statistic {value!r}") from None


@dataclass
class GroupSums:
    """Within-group vector sums and sums of squared row norms.

    Fields may carry a leading batch axis (one entry per assignment).
    """

    s_y: np.ndarray
    s_z: np.ndarray
    q_y: np.ndarray | float
    q_z: np.ndarray | float


def _assignment_mask(assignment, n: int) -> np.ndarray:
    mask = np.asarray(assignment)
    if mask.shape[-1] != n:
        raise ParameterError(f"assignment length {mask.shape[-1]} does not match n={n}")
    if not np.all((mask == 0) | (mask == 1)):
        raise ParameterError("assignment must be a 0/1 vector")
    return mask.astype(bool)


def group_sums(rows: np.ndarray, assignment) -> GroupSums:
    """Group sums for one assignment (1-D mask) or a batch (2-D, one mask per row)."""
    rows = np.asarray(rows, dtype=np.float64)
    mask = _assignment_mask(assignment, rows.shape[0])
    sq = np.einsum("ij,ij->i", rows, rows)
    if mask.ndim == 1:
        return GroupSums(rows[mask].sum(axis=0), rows[~mask].sum(axis=0),
                         float(sq[mask].sum()), float(sq[~mask].sum()))
    w = mask.astype(np.float64)
    s_y = w @ rows
    s_z = (1.0 - w) @ rows
    return GroupSums(s_y, s_z, w @ sq, (1.0 - w) @ sq)


def _check_sizes(n1: int, n2: int, minimum: int = 2):
    if n1 < minimum or n2 < minimum:
        raise DegenerateSampleError(
            f"each group needs at least {minimum} views, got n1={n1}, n2={n2}")


def u_statistic_naive(rows, assignment=None, n1: int | None = None) -> float:
    """Literal triple-sum evaluation of the U-statistic (quadratic cost).

    ``rows`` may be a ``PrivateViewMatrix``; without an assignment the first
    ``n1`` rows form group Y.
    """
    if hasattr(rows, "n1"):
        n1 = rows.n1 if n1 is None else n1
        rows = rows.rows
    rows = np.asarray(rows, dtype=np.float64)
    n = rows.shape[0]
    if assignment is None:
        if n1 is None:
            raise ParameterError("need an assignment or n1")
        assignment = np.arange(n) < n1
    mask = _assignment_mask(assignment, n)
    y, z = rows[mask], rows[~mask]
    m1, m2 = len(y), len(z)
    _check_sizes(m1, m2)
    gy, gz = y @ y.T, z @ z.T
    within_y = (gy.sum() - np.trace(gy)) / (m1 * (m1 - 1))
    within_z = (gz.sum() - np.trace(gz)) / (m2 * (m2 - 1))
    cross = (y @ z.T).sum() / (m1 * m2)
    return float(within_y + within_z - 2.0 * cross)


def u_statistic_fast(sums: GroupSums, n1: int, n2: int):
    """U-statistic from group sums in O(k); vectorised over a batch axis."""
    _check_sizes(n1, n2)
    sy, sz = np.asarray(sums.s_y), np.asarray(sums.s_z)
    syy = np.einsum("...j,...j->...", sy, sy)
    szz = np.einsum("...j,...j->...", sz, sz)
    syz = np.einsum("...j,...j->...", sy, sz)
    u = ((syy - sums.q_y) / (n1 * (n1 - 1))
         + (szz - sums.q_z) / (n2 * (n2 - 1))
         - 2.0 * syz / (n1 * n2))
    return float(u) if np.ndim(u) == 0 else u


def _chi_from_counts(c_y: np.ndarray, c_z: np.ndarray, n1: int, n2: int):
    pooled = (c_y + c_z) / (n1 + n2)
    diff = c_y / n1 - c_z / n2
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(pooled > 0, diff**2 / np.where(pooled > 0, pooled, 1.0), 0.0)
    return terms.sum(axis=-1) / (1.0 / n1 + 1.0 / n2)


def chi_statistic(y_cats, z_cats, k: int) -> float:
    """Pooled chi-square statistic on category samples.

    Categories unobserved in both groups contribute nothing.
    """
    y_cats, z_cats = np.asarray(y_cats, dtype=np.int64), np.asarray(z_cats, dtype=np.int64)
    n1, n2 = len(y_cats), len(z_cats)
    _check_sizes(n1, n2, minimum=1)
    for c in (y_cats, z_cats):
        if c.size and (c.min() < 0 or c.max() >= k):
            raise ParameterError(f"category index out of range [0, {k})")
    c_y = np.bincount(y_cats, minlength=k).astype(np.float64)
    c_z = np.bincount(z_cats, minlength=k).astype(np.float64)
    return float(_chi_from_counts(c_y, c_z, n1, n2))


def centering_projector(k: int) -> np.ndarray:
    return np.eye(k) - np.full((k, k), 1.0 / k)


def _proj_chi_from_sums(s_y, s_z, second_moment, n1: int, n2: int, raise_degenerate: bool):
    s_y, s_z = np.atleast_2d(s_y), np.atleast_2d(s_z)
    k = s_y.shape[-1]
    mean_y, mean_z = s_y / n1, s_z / n2
    cov = (second_moment[None]
           - n1 * mean_y[:, :, None] * mean_y[:, None, :]
           - n2 * mean_z[:, :, None] * mean_z[:, None, :]) / (n1 + n2 - 2)
    evals, evecs = np.linalg.eigh(cov)
    top = evals[:, -1:]
    if raise_degenerate and np.any(top <= 0):
        raise DegenerateSampleError("pooled covariance is zero; all views are identical")
    keep = evals > PINV_RTOL * np.maximum(top, np.finfo(float).tiny)
    inv = np.where(keep, 1.0 / np.where(keep, evals, 1.0), 0.0)
    d = (mean_y - mean_z) @ centering_projector(k)
    coords = np.einsum("bij,bi->bj", evecs, d)
    quad = np.einsum("bj,bj->b", coords**2, inv)
    return quad / (1.0 / n1 + 1.0 / n2)


def proj_chi_statistic(y_views, z_views) -> float:
    """Projected Hotelling-type statistic with a pseudo-inverse pooled covariance."""
    y = np.asarray(y_views, dtype=np.float64)
    z = np.asarray(z_views, dtype=np.float64)
    n1, n2 = len(y), len(z)
    _check_sizes(n1, n2)
    rows = np.vstack([y, z])
    second = rows.T @ rows
    return float(_proj_chi_from_sums(y.sum(axis=0), z.sum(axis=0), second, n1, n2, True)[0])


def validate_views(kind: StatisticKind, rows: np.ndarray):
    """Enforce the input type each statistic is defined on."""
    if kind is StatisticKind.CHI:
        if not (np.all((rows == 0) | (rows == 1)) and np.all(rows.sum(axis=1) == 1)):
            raise ParameterError("Chi needs category (one-hot) views, as produced by GenRR")
    elif kind is StatisticKind.PROJCHI:
        if not np.all((rows == 0) | (rows == 1)):
            raise ParameterError("ProjChi needs 0/1 vector views, as produced by RAPPOR")


class BatchEvaluator:
    """Evaluates one statistic for many group assignments of fixed pooled views.

    Precomputes everything that does not depend on the assignment, so each
    assignment costs O(n k) for the group sums plus O(k) (L2U, Chi) or
    O(k^3) (ProjChi).
    """

    def __init__(self, rows, n1: int, kind: StatisticKind):
        self.rows = np.asarray(rows, dtype=np.float64)
        self.kind = StatisticKind.parse(kind)
        self.n = self.rows.shape[0]
        self.n1, self.n2 = n1, self.n - n1
        validate_views(self.kind, self.rows)
        _check_sizes(self.n1, self.n2, minimum=1 if self.kind is StatisticKind.CHI else 2)
        self.sq = np.einsum("ij,ij->i", self.rows, self.rows)
        self.total = self.rows.sum(axis=0)
        self.q_total = float(self.sq.sum())
        self.second = self.rows.T @ self.rows if self.kind is StatisticKind.PROJCHI else None

    @property
    def scale(self) -> float:
        """Natural magnitude of the statistic, used for tie tolerances."""
        if self.kind is StatisticKind.L2U:
            return self.q_total / self.n
        return 1.0

    def evaluate(self, masks: np.ndarray, observed: bool = False) -> np.ndarray:
        masks = np.atleast_2d(masks)
        w = masks.astype(np.float64)
        s_y = w @ self.rows
        s_z = self.total[None, :] - s_y
        if self.kind is StatisticKind.L2U:
            q_y = w @ self.sq
            return u_statistic_fast(GroupSums(s_y, s_z, q_y, self.q_total - q_y), self.n1, self.n2)
        if self.kind is StatisticKind.CHI:
            return _chi_from_counts(s_y, s_z, self.n1, self.n2)
        return _proj_chi_from_sums(s_y, s_z, self.second, self.n1, self.n2, observed)

    def observed(self) -> float:
        mask = np.arange(self.n) < self.n1
        return float(self.evaluate(mask[None, :], observed=True)[0])


def compute_statistic(kind, rows, n1: int) -> float:
    return BatchEvaluator(rows, n1, kind).observed()
