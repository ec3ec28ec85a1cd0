"""Counter-based, stream-splittable random sampling.

Every draw is a pure function of ``(master_seed, task_id, counter)``: the pair
``(master_seed, task_id)`` is hashed into two 64-bit stream words, and the
``i``-th uniform of a stream is a keyed avalanche hash of ``i``. Nothing is
shared between streams, so replications and permutations can be evaluated in
any order, on any number of workers, and reproduce bit-for-bit.

All continuous and discrete laws are obtained by inversion from open-interval
uniforms on (0, 1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .exceptions import ParameterError

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_SALT_A = 0x632BE59BD9B4E019
_SALT_B = 0xD1B54A32D192ED03
_M1 = 0xFF51AFD7ED558CCD
_M2 = 0xC4CEB9FE1A85EC53
_TWO_M53 = 2.0**-53


def _fmix64(x: int) -> int:
    x ^= x >> 33
    x = (x * _M1) & _MASK64
    x ^= x >> 33
    x = (x * _M2) & _MASK64
    x ^= x >> 33
    return x


def _fmix64_array(x: np.ndarray) -> np.ndarray:
    # uint64 arithmetic wraps modulo 2**64, which is what the mixer needs.
    x = x ^ (x >> np.uint64(33))
    x = x * np.uint64(_M1)
    x = x ^ (x >> np.uint64(33))
    x = x * np.uint64(_M2)
    x = x ^ (x >> np.uint64(33))
    return x


def _stream_words(master_seed: int, task_id: int) -> tuple[int, int]:
    s = _fmix64((master_seed ^ _SALT_A) & _MASK64)
    a = _fmix64((s + task_id * _GOLDEN) & _MASK64)
    b = _fmix64(a ^ _SALT_B)
    return a, b


def _stream_words_array(master_seed: int, task_ids: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    s = np.uint64(_fmix64((master_seed ^ _SALT_A) & _MASK64))
    with np.errstate(over="ignore"):
        a = _fmix64_array(s + task_ids.astype(np.uint64) * np.uint64(_GOLDEN))
        b = _fmix64_array(a ^ np.uint64(_SALT_B))
    return a, b


def _uniform_from_words(a, b, counters: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        x = _fmix64_array(counters * np.uint64(_GOLDEN) + a)
        x = _fmix64_array(x ^ b)
    # top 53 bits, shifted by half an ulp: lands strictly inside (0, 1)
    return ((x >> np.uint64(11)).astype(np.float64) + 0.5) * _TWO_M53


@dataclass(frozen=True)
class StreamKey:
    """Identifies one substream: a master seed plus a task index.

    ``child`` nests keys, e.g. replication -> permutation, so that inner
    streams are again a pure function of the full path.
    """

    master_seed: int
    task_id: int = 0

    def __post_init__(self):
        for name in ("master_seed", "task_id"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or not 0 <= int(v) <= _MASK64:
                raise ParameterError(f"{name} must be an unsigned 64-bit integer, got {v!r}")

    def child(self, task_id: int) -> StreamKey:
        a, _ = _stream_words(int(self.master_seed), int(self.task_id))
        return StreamKey(a, int(task_id))


class Stream:
    """Sequential view on one counter-based substream.

    Single-owner: ``position`` advances with every draw.
    """

    def __init__(self, key: StreamKey):
        self.key = key
        self._a, self._b = (np.uint64(w) for w in _stream_words(int(key.master_seed), int(key.task_id)))
        self.position = 0

    def uniform(self, size=None):
        """Uniform draws on the open interval (0, 1)."""
        shape = () if size is None else (size if isinstance(size, tuple) else (int(size),))
        n = int(np.prod(shape, dtype=np.int64))
        counters = np.arange(self.position, self.position + n, dtype=np.uint64)
        self.position += n
        u = _uniform_from_words(self._a, self._b, counters).reshape(shape)
        return float(u) if size is None else u

    def __repr__(self):
        return f"Stream({self.key}, position={self.position})"


def derive_stream(key: StreamKey) -> Stream:
    return Stream(key)


def uniform_block(key: StreamKey, task_ids, length: int) -> np.ndarray:
    """Row ``r`` equals the first ``length`` uniforms of ``key.child(task_ids[r])``.

    Vectorised across many sibling substreams; used by the permutation engine
    so that permutation ``b`` always reads substream ``b``.
    """
    task_ids = np.asarray(task_ids, dtype=np.uint64)
    parent, _ = _stream_words(int(key.master_seed), int(key.task_id))
    a, b = _stream_words_array(parent, task_ids)
    counters = np.arange(length, dtype=np.uint64)
    return _uniform_from_words(a[:, None], b[:, None], counters[None, :])


def _check_size(size):
    return None if size is None else size


def laplace_inverse_cdf(u, scale: float):
    u = np.asarray(u, dtype=np.float64)
    c = u - 0.5
    return -scale * np.sign(c) * np.log1p(-2.0 * np.abs(c))


def sample_laplace(scale: float, stream, size=None):
    """Centered Laplace draws with scale ``b`` (variance ``2 b**2``)."""
    if not scale > 0:
        raise ParameterError(f"Laplace scale must be positive, got {scale}")
    x = laplace_inverse_cdf(stream.uniform(_check_size(size)), scale)
    return float(x) if size is None else x


def _geometric(u, log_zeta: float):
    # failures before first success, success probability 1 - zeta
    return np.floor(np.log(u) / log_zeta).astype(np.int64)


def sample_discrete_laplace(zeta: float, stream, size=None):
    """Discrete Laplace draws, P(W=w) = (1-zeta)/(1+zeta) * zeta**|w|.

    Realised as the difference of two independent geometric counts.
    """
    if not 0.0 < zeta < 1.0:
        raise ParameterError(f"discrete Laplace parameter must lie in (0, 1), got {zeta}")
    shape = () if size is None else (size if isinstance(size, tuple) else (int(size),))
    u = stream.uniform((2,) + shape)
    log_zeta = np.log(zeta)
    w = _geometric(u[0], log_zeta) - _geometric(u[1], log_zeta)
    return int(w) if size is None else w


def _validate_probs(probs) -> np.ndarray:
    p = np.asarray(probs, dtype=np.float64)
    if p.ndim != 1 or p.size == 0:
        raise ParameterError("probability vector must be one-dimensional and non-empty")
    if np.any(p < 0) or not np.all(np.isfinite(p)):
        raise ParameterError("probability vector has negative or non-finite entries")
    if abs(p.sum() - 1.0) > 1e-12:
        raise ParameterError(f"probabilities sum to {p.sum()!r}, not 1")
    return p


def sample_categorical(probs, stream, size=None):
    """Category indices drawn by cumulative-sum inversion."""
    p = _validate_probs(probs)
    cdf = np.cumsum(p)
    u = stream.uniform(_check_size(size))
    idx = np.searchsorted(cdf, u, side="right")
    # u just below 1 can exceed a rounded cdf[-1]; fall back to the last positive category
    last = int(np.flatnonzero(p > 0)[-1])
    idx = np.minimum(idx, last)
    return int(idx) if size is None else idx


def sample_std_gaussian_vector(d: int, stream, size=None) -> np.ndarray:
    """Standard normal vectors of length ``d`` by inverse-CDF (``ndtri``).

    With ``size`` given, returns a ``(size, d)`` matrix.
    """
    if int(d) < 1:
        raise ParameterError(f"dimension must be >= 1, got {d}")
    shape = (int(d),) if size is None else (int(size), int(d))
    return ndtri(stream.uniform(shape))
