import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import se_mean, se_var
from ldp_twosample.exceptions import ParameterError
from ldp_twosample.sampling import (StreamKey, derive_stream, laplace_inverse_cdf,
                                    sample_categorical, sample_discrete_laplace, sample_laplace,
                                    sample_std_gaussian_vector, uniform_block)

N = 10**6


def test_same_key_same_sequence():
    a = derive_stream(StreamKey(7, 0)).uniform(100)
    b = derive_stream(StreamKey(7, 0)).uniform(100)
    assert np.array_equal(a, b)


@pytest.mark.parametrize("other", [StreamKey(7, 1), StreamKey(8, 0)])
def test_distinct_keys_differ(other):
    a = derive_stream(StreamKey(7, 0)).uniform(100)
    b = derive_stream(other).uniform(100)
    assert not np.any(a == b)


def test_sequential_draws_continue_the_stream():
    s = derive_stream(StreamKey(3, 4))
    first, second = s.uniform(10), s.uniform(5)
    whole = derive_stream(StreamKey(3, 4)).uniform(15)
    assert np.array_equal(np.concatenate([first, second]), whole)
    assert s.position == 15


def test_uniform_block_rows_match_child_streams():
    key = StreamKey(11, 2)
    block = uniform_block(key, [0, 5, 9], 20)
    for row, t in zip(block, [0, 5, 9]):
        assert np.array_equal(row, derive_stream(key.child(t)).uniform(20))


def test_uniforms_open_interval_and_moments():
    u = derive_stream(StreamKey(1)).uniform(N)
    assert u.min() > 0.0 and u.max() < 1.0
    assert abs(u.mean() - 0.5) < 3 * math.sqrt(1 / 12 / N)


def test_pairwise_correlation_smoke():
    key = StreamKey(2024)
    block = uniform_block(key, np.arange(16), 20000)
    corr = np.corrcoef(block)
    off = corr[~np.eye(16, dtype=bool)]
    # 4 standard errors of a null correlation
    assert np.max(np.abs(off)) < 4 / math.sqrt(20000)


@given(st.integers(0, 2**64 - 1), st.integers(0, 2**64 - 1))
@settings(max_examples=50, deadline=None)
def test_stream_is_pure_function_of_key(seed, task):
    key = StreamKey(seed, task)
    assert np.array_equal(derive_stream(key).uniform(8), derive_stream(StreamKey(seed, task)).uniform(8))


def test_stream_key_rejects_out_of_range():
    with pytest.raises(ParameterError):
        StreamKey(-1)
    with pytest.raises(ParameterError):
        StreamKey(0, 2**64)


def test_laplace_inverse_cdf_median():
    assert laplace_inverse_cdf(0.5, 3.0) == 0.0


def test_laplace_unit_variance_moments():
    x = sample_laplace(1 / math.sqrt(2), derive_stream(StreamKey(5)), size=N)
    assert abs(x.var() - 1.0) < 0.01
    assert abs(x.mean()) < 0.005


def test_laplace_bad_scale():
    with pytest.raises(ParameterError):
        sample_laplace(0.0, derive_stream(StreamKey(0)))


def test_scalar_draws_are_python_numbers():
    s = derive_stream(StreamKey(9))
    assert isinstance(sample_laplace(1.0, s), float)
    assert isinstance(sample_discrete_laplace(0.5, s), int)
    assert isinstance(sample_categorical([0.2, 0.8], s), int)


def test_discrete_laplace_zeta_half():
    w = sample_discrete_laplace(0.5, derive_stream(StreamKey(6)), size=N)
    assert abs(np.mean(w == 0) - 1 / 3) < 0.002
    assert abs(w.var() - 4.0) < 0.05
    assert abs(w.mean()) < 3 * se_mean(w)


@pytest.mark.parametrize("zeta", [0.3, 0.7788])
def test_discrete_laplace_pmf(zeta):
    w = sample_discrete_laplace(zeta, derive_stream(StreamKey(12, 1)), size=N)
    support = np.arange(-10, 11)
    pmf = (1 - zeta) / (1 + zeta) * zeta ** np.abs(support)
    freq = np.array([np.mean(w == v) for v in support])
    se = np.sqrt(pmf * (1 - pmf) / N)
    assert np.all(np.abs(freq - pmf) < 4 * se)


@pytest.mark.parametrize("k,alpha", [(4, 1.0), (40, 0.5)])
def test_discrete_laplace_variance_bound(k, alpha):
    zeta = math.exp(-alpha / (2 * math.sqrt(k)))
    w = sample_discrete_laplace(zeta, derive_stream(StreamKey(13, k)), size=N)
    assert w.var() <= 8 * k / alpha**2 + 3 * se_var(w)


@pytest.mark.parametrize("zeta", [0.0, 1.0, -0.2, 1.5])
def test_discrete_laplace_bad_param(zeta):
    with pytest.raises(ParameterError):
        sample_discrete_laplace(zeta, derive_stream(StreamKey(0)))


def test_categorical_point_mass():
    x = sample_categorical([1.0, 0.0, 0.0], derive_stream(StreamKey(1)), size=1000)
    assert np.all(x == 0)


def test_categorical_zero_mass_never_drawn():
    x = sample_categorical([0.5, 0.0, 0.5], derive_stream(StreamKey(1)), size=10**5)
    assert not np.any(x == 1)


def test_categorical_fair_coin():
    x = sample_categorical([0.5, 0.5], derive_stream(StreamKey(2)), size=N)
    assert abs(np.mean(x == 0) - 0.5) < 0.002


def test_categorical_power_law():
    w = 1 / np.arange(1, 6)
    p = w / w.sum()
    x = sample_categorical(p, derive_stream(StreamKey(3)), size=N)
    freq = np.bincount(x, minlength=5) / N
    assert np.all(np.abs(freq - p) < 3 * np.sqrt(p * (1 - p) / N))


@pytest.mark.parametrize("probs", [[0.5, -0.1, 0.6], [0.3, 0.3], [0.5, 0.5 + 1e-9]])
def test_categorical_bad_probs(probs):
    with pytest.raises(ParameterError):
        sample_categorical(probs, derive_stream(StreamKey(0)))


def test_gaussian_moments():
    g = sample_std_gaussian_vector(2, derive_stream(StreamKey(4)), size=N)
    assert g.shape == (N, 2)
    assert np.all(np.abs(g.mean(axis=0)) < 0.005)
    assert np.all(np.abs(g.var(axis=0) - 1) < 0.01)
    assert abs(np.corrcoef(g.T)[0, 1]) < 0.005


def test_gaussian_single_vector_and_bad_dim():
    assert sample_std_gaussian_vector(3, derive_stream(StreamKey(0))).shape == (3,)
    with pytest.raises(ParameterError):
        sample_std_gaussian_vector(0, derive_stream(StreamKey(0)))
