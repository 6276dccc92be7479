
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from htssnc._numeric import inf_split
from htssnc.bounds import (ClosedForm, DelayBound, backlog_bound, delay_bound,
                           delay_quantile, lower_bound_quantile_pareto, loglog_slope)
from htssnc.envelopes import HtssEnvelope, envelope_from_pareto, envelope_from_stable_quantiles
from htssnc.powerlaw_algebra import ZeroTail, power_law
from htssnc.service import HtServiceCurve, InstabilityError, packetizer_curve
from htssnc.stable import DEFAULT_EPSILONS, StableSpec, _cms, quantile_table

B_BITS = 8 * 150
LAM = 75e6 / (8 * 400)
C = 100e6


@pytest.fixture(scope="module")
def single_node():
    env = envelope_from_pareto(LAM, B_BITS, 1.6)
    sc = packetizer_curve(C, 1.6, B_BITS**1.6, 8 * 400, 0.75)
    return env, sc, delay_bound(env, sc)


def test_backlog_exponent_below_one():
    bb = backlog_bound(HtssEnvelope(75e6, 0.8, 1.6, 234.0), 100e6)
    assert bb.tail.alpha == pytest.approx(0.32) and bb.tail.alpha < 1


def test_backlog_linear_in_K():
    a = backlog_bound(HtssEnvelope(75e6, 0.8, 1.6, 1.0), 100e6).tail.K
    b = backlog_bound(HtssEnvelope(75e6, 0.8, 1.6, 2.0), 100e6).tail.K
    assert b == pytest.approx(2 * a, rel=1e-12)


def test_backlog_unstable():
    with pytest.raises(InstabilityError):
        backlog_bound(HtssEnvelope(75e6, 0.8, 1.6, 1.0), 75e6)


def test_backlog_monte_carlo_stable_motion():
    # Levy stable motion (H = 1/alpha) at C = 2r: backlog = sup of the reversed walk
    alpha, r = 1.6, 1.0
    qt = quantile_table(StableSpec(alpha), DEFAULT_EPSILONS, 10**5, 1)
    env = envelope_from_stable_quantiles(r, alpha, 1 / alpha, 1.0, qt)
    bb = backlog_bound(env, 2 * r)
    rng = np.random.default_rng(3)
    inc = r + _cms(alpha, rng, (2000, 1000))
    x = np.concatenate([np.zeros((2000, 1)), np.cumsum(inc - 2 * r, axis=1)], axis=1)
    q = x[:, -1] - x.min(axis=1)
    for lvl in (0.3, 0.1):
        s = bb.tail.inverse(lvl)
        assert np.mean(q > s) <= lvl


def test_closed_form_symmetric():
    beta, kt = 0.32, 5.0
    env_like = power_law(kt, beta)
    sc = HtServiceCurve(10.0, power_law(kt, beta))
    db = DelayBound(10.0, env_like, sc.tail,
                    ClosedForm(2 ** (1 + beta) * kt, 10.0, beta))
    assert db.closed.M == pytest.approx(((2 * kt ** (1 / (1 + beta))) ** (1 + beta)))


def test_single_node_slope(single_node):
    _, _, db = single_node
    assert loglog_slope(db, 1.0, 1e3) == pytest.approx(-0.6, abs=0.02)


def test_single_node_reference_quantiles(single_node):
    env, sc, db = single_node
    assert env.K == pytest.approx(LAM * B_BITS**1.6)
    assert db.arrival.K == pytest.approx(3325.0, rel=1e-3)
    assert sc.tail.K == pytest.approx(32.995, rel=1e-3)
    assert db.closed.M == pytest.approx(3627.7, rel=1e-3)
    for eps, w in ((0.1, 0.3975), (0.03, 2.957), (0.01, 18.45)):
        assert delay_quantile(db, eps) == pytest.approx(w, rel=2e-3)


def test_two_term_not_above_closed_form(single_node):
    _, _, db = single_node
    rng = np.random.default_rng(0)
    for w in 10 ** rng.uniform(-4, 4, 50):
        assert db.two_term(w) <= float(db.closed(w)) * (1 + 1e-9)


def test_two_term_matches_bruteforce(single_node):
    _, _, db = single_node
    for w in (0.01, 1.0, 100.0):
        total = db.R * w
        s1 = total * np.linspace(1e-6, 1 - 1e-6, 200001)
        brute = np.min(db.arrival(s1) + db.service(total - s1))
        assert db.two_term(w) <= brute * (1 + 1e-9)
        assert db.two_term(w) >= brute * (1 - 1e-3)


def test_closed_form_quantile_inversion():
    cf = ClosedForm(50.0, 2.0, 0.8)
    db = DelayBound(2.0, power_law(1, 0.8), ZeroTail(), cf)
    for eps in (0.5, 1e-2, 1e-4):
        w = delay_quantile(db, eps, closed_form=True)
        assert w == pytest.approx((50.0 / eps) ** (1 / 0.8) / 2.0, rel=1e-4)
        assert w == pytest.approx(cf.quantile(eps), rel=1e-4)


def test_quantile_at_eps_one(single_node):
    _, _, db = single_node
    w1 = delay_quantile(db, 1.0)
    assert db.two_term(w1 * (1 + 1e-3)) < 1.0
    assert db.two_term(w1 * (1 - 1e-3)) == pytest.approx(1.0)


def test_quantile_monotone(single_node):
    _, _, db = single_node
    ws = [delay_quantile(db, e) for e in (1e-1, 1e-2, 1e-3)]
    assert ws[0] < ws[1] < ws[2]


def test_quantile_out_of_range():
    db = DelayBound(1.0, power_law(1e30, 0.1), ZeroTail())
    with pytest.raises(ValueError):
        delay_quantile(db, 1e-3)


def test_delay_bound_unstable():
    with pytest.raises(InstabilityError):
        delay_bound(HtssEnvelope(2.0, 0.8, 1.6, 1.0), HtServiceCurve(1.0, ZeroTail()))


def test_lower_bound_reference():
    w = lower_bound_quantile_pareto(1, B_BITS, 1.6, LAM, 1e-2, C=C)
    # arithmetic oracle with b/C = 1.2e-5 s
    assert w == pytest.approx(7.25185462094e-3, rel=1e-10)


@given(N=st.integers(1, 200), eps=st.floats(1e-6, 0.9), alpha=st.floats(1.1, 1.95))
def test_lower_bound_doubling(N, eps, alpha):
    a = lower_bound_quantile_pareto(N, 1.0, alpha, 10.0, eps)
    b = lower_bound_quantile_pareto(2 * N, 1.0, alpha, 10.0, eps)
    assert b / a == pytest.approx(2 ** (alpha / (alpha - 1)), rel=1e-9)


def test_lower_bound_growth_exponent():
    Ns = np.array([1, 2, 4, 8, 16, 32, 64])
    ws = [lower_bound_quantile_pareto(int(n), 1.0, 1.6, 1.0, 0.01) for n in Ns]
    assert np.polyfit(np.log(Ns), np.log(ws), 1)[0] == pytest.approx(1.6 / 0.6, abs=1e-9)


@settings(max_examples=25)
@given(K1=st.floats(1e-2, 1e4), K2=st.floats(1e-2, 1e4), beta=st.floats(0.2, 1.5),
       w=st.floats(1e-2, 1e3))
def test_inf_split_not_above_any_split(K1, K2, beta, w):
    f1, f2 = power_law(K1, beta), power_law(K2, beta)
    v, s1 = inf_split(f1, f2, w)
    for u in (0.1, 0.5, 0.9):
        assert v <= float(f1(u * w) + f2((1 - u) * w)) * (1 + 1e-9)
    assert 0 <= s1 <= w
