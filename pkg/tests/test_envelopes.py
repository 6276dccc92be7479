import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from htssnc.bounds import backlog_bound
from htssnc.envelopes import (GaussEnvelope, HtssEnvelope, envelope_from_fbm,
                              envelope_from_json, envelope_from_pareto, envelope_from_stable,
                              envelope_from_stable_quantiles, gauss_sample_path_params,
                              k_tilde, k_tilde_gamma, k_tilde_objective, pareto_mean,
                              sample_path_envelope)
from htssnc.stable import QuantileTable, StableSpec, c_alpha, quantile_table


def grid_k_tilde(env, mu, n=10**4):
    # dense grid on gamma in (1, 1 + mu/r); refined around the coarse minimum
    top = 1 + mu / env.r
    g = 1 + (top - 1) * np.linspace(0, 1, n + 2)[1:-1]
    v = k_tilde_objective(env, mu, g)
    i = int(np.argmin(v))
    g2 = np.linspace(g[max(i - 1, 0)], g[min(i + 1, n - 1)], n)
    return env.K * min(float(v[i]), float(np.min(k_tilde_objective(env, mu, g2))))


def test_k_tilde_reference_value():
    env = HtssEnvelope(1.0, 0.8, 1.6, 1.0)
    # mpmath minimization of the objective
    assert k_tilde(env, 1.0) == pytest.approx(35.1594631108, rel=1e-9)
    assert k_tilde_gamma(env, 1.0) == pytest.approx(1.29387, rel=1e-4)
    assert k_tilde(env, 1.0) == pytest.approx(grid_k_tilde(env, 1.0), rel=1e-4)


def test_k_tilde_linear_in_K():
    a = HtssEnvelope(1.0, 0.8, 1.6, 1.0)
    b = HtssEnvelope(1.0, 0.8, 1.6, 2.0)
    assert k_tilde(b, 1.0) == pytest.approx(2 * k_tilde(a, 1.0), rel=1e-12)


def test_k_tilde_link_scale_monotone_in_mu():
    env = HtssEnvelope(75e6, 0.8, 1.6, 234.0)
    vals = [k_tilde(env, m) for m in (5e6, 10e6, 25e6)]
    ref = (1.84646e-4, 4.01489e-5, 5.75931e-6)
    for v, r in zip(vals, ref):
        assert math.isfinite(v) and v > 0
        assert v == pytest.approx(r, rel=1e-4)
    assert vals[0] > vals[1] > vals[2]


@given(r=st.floats(0.1, 1e3), mu_frac=st.floats(0.01, 10), alpha=st.floats(1.05, 1.99),
       H=st.floats(0.01, 0.99), K=st.floats(1e-3, 1e3))
def test_k_tilde_is_infimum(r, mu_frac, alpha, H, K):
    H = max(H, 1 / alpha + 1e-3) if H < 1 / alpha else H
    if H >= 1:
        return
    env = HtssEnvelope(r, H, alpha, K)
    mu = r * mu_frac
    kt = k_tilde(env, mu)
    assert kt <= grid_k_tilde(env, mu, 2000) * (1 + 1e-9)


def test_sample_path_exponents():
    env = HtssEnvelope(1.0, 0.8, 1.6, 1.0)
    assert sample_path_envelope(env, 1.0).tail.alpha == pytest.approx(0.32)
    env = HtssEnvelope(1.0, 1 / 1.6, 1.6, 1.0)
    assert sample_path_envelope(env, 1.0).tail.alpha == pytest.approx(0.6)


def test_sample_path_matches_backlog_bound():
    env = HtssEnvelope(75e6, 0.8, 1.6, 234.0)
    sp = sample_path_envelope(env, 25e6)
    s = np.logspace(3, 9, 7)
    assert np.allclose(sp.tail(s), backlog_bound(env, 100e6)(s), rtol=1e-12)


def test_gauss_params():
    env = GaussEnvelope(1.0, 0.5, 1.0, 0.5)
    L, c, beta = gauss_sample_path_params(env, 1.0)
    assert beta == pytest.approx(1.0) and c == pytest.approx(4.0)
    L, _, _ = gauss_sample_path_params(GaussEnvelope(1.0, 0.75, 1.0, 0.5), 1.0)
    assert L == pytest.approx(46.1307723379, rel=1e-10)
    assert L == pytest.approx(math.e * 4**0.75 * 0.5 * 2.25 / (0.75 * 0.25))


def test_stable_tail_envelope_constant():
    env = envelope_from_stable(75e6, 1.6, 0.8, 60e6)
    assert env.K == pytest.approx((60e6 / c_alpha(1.6)) ** 1.6, rel=1e-12)
    env2 = envelope_from_stable(75e6, 1.6, 0.8, 120e6)
    assert env2.K / env.K == pytest.approx(2**1.6)


def test_quantile_envelope_single_entry():
    qt = QuantileTable(1.6, ((0.5, 0.7),), 100, 0)
    env = envelope_from_stable_quantiles(1.0, 1.6, 0.8, 3.0, qt)
    assert env.K == pytest.approx(0.5 * (3.0 * 0.7) ** 1.6)
    env2 = envelope_from_stable_quantiles(1.0, 1.6, 0.8, 6.0, qt)
    assert env2.K / env.K == pytest.approx(2**1.6)


def test_quantile_envelope_dominates_tail_envelope():
    qt = quantile_table(StableSpec(1.6), [0.5, 0.2, 0.1, 0.05, 0.01], 10**5, 2)
    kq = envelope_from_stable_quantiles(75e6, 1.6, 0.8, 60e6, qt).K
    assert kq >= envelope_from_stable(75e6, 1.6, 0.8, 60e6).K


def test_quantile_envelope_alpha_mismatch():
    qt = QuantileTable(1.7, ((0.5, 0.7),), 100, 0)
    with pytest.raises(ValueError):
        envelope_from_stable_quantiles(1.0, 1.6, 0.8, 3.0, qt)


def test_pareto_envelope():
    assert pareto_mean(150, 1.6) == pytest.approx(400)
    lam = 75e6 / (8 * 400)
    env = envelope_from_pareto(lam, 8 * 150, 1.6)
    assert env.r == pytest.approx(75e6) and env.H == pytest.approx(0.625)
    env2 = envelope_from_pareto(2 * lam, 8 * 150, 1.6)
    assert env2.r == pytest.approx(2 * env.r) and env2.K == pytest.approx(2 * env.K)
    assert env2.H == env.H


def test_fbm_envelope():
    env = envelope_from_fbm(10.0, 0.7, 2.0)
    assert env.K == 0.5
    assert envelope_from_fbm(10.0, 0.7, 2.0, effective_bandwidth=True).K == 1.0
    assert float(env.tail(2.0)) == pytest.approx(0.5 * math.exp(-0.5))
    assert float(env.tail(2.0)) == pytest.approx(0.3033, abs=5e-5)


def test_json_round_trip():
    for env in (HtssEnvelope(1.0, 0.8, 1.6, 2.0), GaussEnvelope(1.0, 0.7, 3.0, 0.5)):
        assert envelope_from_json(env.to_json()) == env
        assert envelope_from_json(json.loads(env.to_json())) == env


def test_validation():
    with pytest.raises(ValueError):
        HtssEnvelope(1.0, 1.2, 1.6, 1.0)
    with pytest.raises(ValueError):
        HtssEnvelope(1.0, 0.8, 1.6, -1.0)
    with pytest.raises(ValueError):
        k_tilde(HtssEnvelope(1.0, 0.8, 1.6, 1.0), 0.0)
