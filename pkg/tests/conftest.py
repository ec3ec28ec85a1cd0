import numpy as np
import pytest


class ConstantStream:
    """Stub stream: every uniform equals ``value`` (0.5 makes all noise zero)."""

    def __init__(self, value=0.5):
        self.value = value

    def uniform(self, size=None):
        if size is None:
            return self.value
        return np.full(size, self.value)


@pytest.fixture
def zero_noise():
    return ConstantStream(0.5)


def se_mean(x):
    x = np.asarray(x, dtype=float)
    return x.std(ddof=1) / np.sqrt(x.shape[0])


def se_var(x):
    """Standard error of the sample variance (fourth-moment formula)."""
    x = np.asarray(x, dtype=float)
    c = x - x.mean()
    m2, m4 = np.mean(c**2), np.mean(c**4)
    return np.sqrt((m4 - m2**2) / x.shape[0])
