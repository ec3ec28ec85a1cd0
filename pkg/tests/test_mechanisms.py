import itertools
import math

import numpy as np
import pytest

from conftest import se_mean, se_var
from ldp_twosample.exceptions import ParameterError, UnsupportedMechanismError
from ldp_twosample.mechanisms import (Mechanism, PrivacyConfig, PrivateViewMatrix,
                                      additive_log_likelihood, derive_params, exact_privacy_ratio,
                                      one_hot, privatize, privatize_disclapu, privatize_genrr,
                                      privatize_lapu, privatize_rappor)
from ldp_twosample.sampling import StreamKey, derive_stream, sample_categorical

N = 10**6
P4 = np.array([0.1, 0.2, 0.3, 0.4])


def _data(p, n, seed):
    return sample_categorical(p, derive_stream(StreamKey(seed, 99)), size=n)


def test_derived_params_k4_alpha1():
    # frozen from a 30-digit mpmath evaluation of the closed forms
    p = derive_params(PrivacyConfig("lapu", 1.0, 4))
    assert p.sigma_alpha == pytest.approx(5.656854249492380, abs=1e-12)
    assert p.zeta_alpha == pytest.approx(0.778800783071405, abs=1e-12)
    assert p.alpha_bf == pytest.approx(0.244918662403709, abs=1e-12)
    assert p.lambda_bf == pytest.approx(0.377540668798145, abs=1e-12)
    assert p.w_genrr == pytest.approx(0.300489181891562, abs=1e-12)


@pytest.mark.parametrize("k", [2, 3, 10, 400])
@pytest.mark.parametrize("alpha", [0.05, 0.5, 1.0, 4.0, 20.0])
def test_param_invariants(k, alpha):
    p = derive_params(PrivacyConfig("rappor", alpha, k))
    assert p.alpha_bf + 2 * p.lambda_bf == pytest.approx(1.0, abs=1e-15)
    assert 0 < p.w_genrr < 1
    assert 0 < p.zeta_alpha < 1


@pytest.mark.parametrize("kwargs", [dict(alpha=-1, k=4), dict(alpha=1, k=1), dict(alpha=1, k=2.5),
                                    dict(alpha=0, k=4, mechanism="lapu")])
def test_config_validation(kwargs):
    kwargs.setdefault("mechanism", "rappor")
    with pytest.raises(ParameterError):
        PrivacyConfig(**kwargs)


def test_unknown_mechanism():
    with pytest.raises(ParameterError):
        PrivacyConfig("laplace", 1.0, 4)


def test_one_hot():
    assert one_hot(0, 3).tolist() == [1, 0, 0]
    assert one_hot(2, 3).tolist() == [0, 0, 1]
    assert np.all(one_hot(np.arange(3), 3).sum(axis=1) == 1)
    with pytest.raises(ParameterError):
        one_hot(3, 3)


@pytest.mark.parametrize("fn", [privatize_lapu, privatize_disclapu, privatize_rappor, privatize_genrr])
def test_out_of_range_category(fn):
    cfg = PrivacyConfig("lapu", 1.0, 4)
    with pytest.raises(ParameterError):
        fn(4, cfg, derive_stream(StreamKey(0)))
    with pytest.raises(ParameterError):
        fn(-1, cfg, derive_stream(StreamKey(0)))


def test_lapu_zero_noise(zero_noise):
    out = privatize_lapu(2, PrivacyConfig("lapu", 1.0, 4), zero_noise)
    assert out.tolist() == [0, 0, 2, 0]


def test_disclapu_zero_noise(zero_noise):
    out = privatize_disclapu(0, PrivacyConfig("disclapu", 1.0, 4), zero_noise)
    assert out.tolist() == [2, 0, 0, 0]


@pytest.mark.parametrize("mech", ["lapu", "disclapu"])
def test_additive_mechanism_moments(mech):
    cfg = PrivacyConfig(mech, 1.0, 4)
    views = privatize(_data(P4, N, 1), cfg, derive_stream(StreamKey(2)))
    mean = views.mean(axis=0)
    se = np.array([se_mean(views[:, m]) for m in range(4)])
    assert np.all(np.abs(mean - 2.0 * P4) < 3 * se)
    bound = 8 * 4 / 1.0**2
    # the noise variance alone, separated from the signal's Bernoulli variance
    noise = views - 2.0 * one_hot(_data(P4, N, 1), 4)
    for m in range(4):
        v, s = noise[:, m].var(), se_var(noise[:, m])
        if mech == "lapu":
            assert abs(v - bound) < 3 * s
        else:
            assert v <= bound + 3 * s


def test_rappor_large_alpha_is_one_hot():
    cfg = PrivacyConfig("rappor", 50.0, 5)
    x = _data(np.full(5, 0.2), 10**5, 3)
    views = privatize_rappor(x, cfg, derive_stream(StreamKey(4)))
    assert np.mean(np.all(views == one_hot(x, 5), axis=1)) > 0.999


def test_rappor_moments():
    cfg = PrivacyConfig("rappor", 1.0, 4)
    p = cfg.params
    views = privatize(_data(P4, N, 5), cfg, derive_stream(StreamKey(6)))
    assert set(np.unique(views)) <= {0.0, 1.0}
    target = p.alpha_bf * P4 + p.lambda_bf
    var_target = target * (1 - target)
    for m in range(4):
        col = views[:, m]
        assert abs(col.mean() - target[m]) < 3 * se_mean(col)
        assert abs(col.var() - var_target[m]) < 3 * se_var(col)


def test_genrr_alpha_zero_is_uniform():
    cfg = PrivacyConfig("genrr", 0.0, 2)
    out = privatize_genrr(np.zeros(N, dtype=int), cfg, derive_stream(StreamKey(7)))
    assert abs(np.mean(out == 0) - 0.5) < 3 * math.sqrt(0.25 / N)


def test_genrr_keep_probability():
    cfg = PrivacyConfig("genrr", 1.0, 4)
    out = privatize_genrr(np.zeros(N, dtype=int), cfg, derive_stream(StreamKey(8)))
    keep = 0.475366886418672  # e / (e + 3), mpmath
    assert abs(np.mean(out == 0) - keep) < 3 * math.sqrt(keep * (1 - keep) / N)
    # the other labels share the rest evenly
    other = (1 - keep) / 3
    for m in (1, 2, 3):
        assert abs(np.mean(out == m) - other) < 3 * math.sqrt(other * (1 - other) / N)


def test_genrr_marginal_is_mixture():
    cfg = PrivacyConfig("genrr", 1.0, 4)
    w = cfg.params.w_genrr
    out = privatize_genrr(_data(P4, N, 9), cfg, derive_stream(StreamKey(10)))
    target = w * P4 + (1 - w) / 4
    freq = np.bincount(out, minlength=4) / N
    assert np.all(np.abs(freq - target) < 3 * np.sqrt(target * (1 - target) / N))


def test_privatize_genrr_dense_rows_are_one_hot():
    cfg = PrivacyConfig("genrr", 1.0, 6)
    rows = privatize(np.arange(6), cfg, derive_stream(StreamKey(0)))
    assert rows.shape == (6, 6)
    assert np.all(rows.sum(axis=1) == 1)


def test_privatize_is_deterministic():
    cfg = PrivacyConfig("lapu", 0.5, 10)
    x = np.arange(10)
    a = privatize(x, cfg, derive_stream(StreamKey(1, 2)))
    b = privatize(x, cfg, derive_stream(StreamKey(1, 2)))
    assert np.array_equal(a, b)


@pytest.mark.parametrize("alpha", [0.1, 0.5, 1.0, 2.0])
@pytest.mark.parametrize("k", [2, 3, 4, 8])
def test_rappor_exact_ratio_bound(k, alpha):
    assert exact_privacy_ratio(PrivacyConfig("rappor", alpha, k)) <= math.exp(alpha) * (1 + 1e-12)


@pytest.mark.parametrize("alpha", [0.1, 0.5, 1.0, 2.0])
@pytest.mark.parametrize("k", [2, 10, 100])
def test_genrr_exact_ratio(k, alpha):
    assert exact_privacy_ratio(PrivacyConfig("genrr", alpha, k)) == pytest.approx(math.exp(alpha), rel=1e-12)


def _brute_rappor_ratio(k, alpha):
    keep = math.exp(alpha / 2) / (math.exp(alpha / 2) + 1)
    worst = 0.0
    for out in itertools.product((0, 1), repeat=k):
        probs = []
        for x in range(k):
            pr = 1.0
            for m, bit in enumerate(out):
                pr *= keep if bit == (m == x) else 1 - keep
            probs.append(pr)
        worst = max(worst, max(probs) / min(probs))
    return worst


def test_rappor_ratio_attains_e_alpha_k3():
    # plain-python enumeration of all 8 outputs and 9 input pairs
    assert _brute_rappor_ratio(3, 1.0) == pytest.approx(math.e, rel=1e-12)
    assert exact_privacy_ratio(PrivacyConfig("rappor", 1.0, 3)) == pytest.approx(math.e, rel=1e-12)


def test_rappor_ratio_alpha_zero():
    assert exact_privacy_ratio(PrivacyConfig("rappor", 0.0, 4)) == pytest.approx(1.0)


def test_exact_ratio_rejects_continuous():
    with pytest.raises(UnsupportedMechanismError):
        exact_privacy_ratio(PrivacyConfig("lapu", 1.0, 4))


@pytest.mark.parametrize("mech", ["lapu", "disclapu"])
@pytest.mark.parametrize("alpha", [0.2, 1.0, 3.0])
def test_additive_density_ratio_grid(mech, alpha):
    cfg = PrivacyConfig(mech, alpha, 2)
    grid = np.linspace(-6, 6, 49)
    worst = -np.inf
    for o0 in grid:
        for o1 in grid:
            out = (o0, o1)
            lr = additive_log_likelihood(out, 0, cfg) - additive_log_likelihood(out, 1, cfg)
            worst = max(worst, abs(lr))
    assert worst <= alpha + 1e-12


def test_view_matrix_validation():
    with pytest.raises(ParameterError):
        PrivateViewMatrix(np.zeros((3, 2)), 3)
    with pytest.raises(ParameterError):
        PrivateViewMatrix(np.zeros((3, 2)), 0)
    v = PrivateViewMatrix.from_groups(np.zeros((2, 3)), np.ones((4, 3)), Mechanism.RAPPOR)
    assert (v.n, v.n1, v.n2, v.k) == (6, 2, 4, 3)
