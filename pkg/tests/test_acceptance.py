"""Acceptance criteria, one function each.

Run under pytest (one PASS/FAIL line per criterion is printed even with
output capture on) or directly: ``python tests/test_acceptance.py``.
"""

import math
import sys
import time
from importlib import resources
from pathlib import Path

import numpy as np
import pytest
from scipy.optimize import minimize, minimize_scalar

from htssnc.bounds import (delay_bound, delay_quantile, lower_bound_quantile_pareto,
                           loglog_slope)
from htssnc.envelopes import (HtssEnvelope, envelope_from_pareto,
                              envelope_from_stable_quantiles, k_tilde, k_tilde_objective,
                              sample_path_envelope)
from htssnc.network import (PathSpec, end_to_end_delay, iterated_chain_tail,
                            network_service_curve, scaling_study)
from htssnc.powerlaw_algebra import (geometric_sum_bound_est1, geometric_sum_bound_est2,
                                     minimize_sum, power_law)
from htssnc.service import HtServiceCurve, packetizer_curve
from htssnc.sim import ParetoGen, TandemConfig, lindley_delays, run_tandem
from htssnc.stable import DEFAULT_EPSILONS, StableSpec, _cms, quantile_table
from htssnc.traces import fit_from_ccdfs, load_ccdf_fixture

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
C = 100e6
B_BITS = 8 * 150
SRC = ParetoGen.from_rate(75e6, 150, 1.6)
EPS = (1e-1, 3e-2, 1e-2)


RESULTS = []


def report(n, ok, detail, elapsed):
    line = f"criterion {n:2d} {'PASS' if ok else 'FAIL'} ({elapsed:.1f}s): {detail}"
    RESULTS.append(line)
    if __name__ == "__main__":
        print(line, flush=True)
    return line


def timed(fn):
    t0 = time.perf_counter()
    ok, detail = fn()
    return ok, detail, time.perf_counter() - t0


# -- 1 ----------------------------------------------------------------------

def _simplex_min(Ks, a, sigma):
    """Direct numerical minimum of sum K_j s_j^-a over s_1 + .. + s_n = sigma."""
    Ks = np.asarray(Ks)
    if Ks.size == 1:
        return Ks[0] * sigma**-a
    if Ks.size == 2:
        r = minimize_scalar(lambda u: Ks[0] * (u * sigma) ** -a + Ks[1] * ((1 - u) * sigma) ** -a,
                            bounds=(1e-12, 1 - 1e-12), method="bounded",
                            options={"xatol": 1e-14})
        return float(r.fun)

    def f(z):
        u = np.exp(np.concatenate([[0.0], z]))
        u = u / u.sum()
        return float(np.sum(Ks * (u * sigma) ** -a))

    r = minimize(f, np.zeros(Ks.size - 1), method="L-BFGS-B",
                 options={"ftol": 1e-15, "gtol": 1e-12})
    return float(r.fun)


def criterion_1():
    rng = np.random.default_rng(1)
    worst = 0.0
    t0 = time.perf_counter()
    for _ in range(100):
        n = int(rng.integers(1, 4))
        Ks = 10 ** rng.uniform(-3, 3, n)
        a = rng.uniform(0.2, 2.5)
        sigma = 10 ** rng.uniform(0, 4)
        closed = minimize_sum([power_law(k, a) for k in Ks]).K * sigma**-a
        num = _simplex_min(Ks, a, sigma)
        worst = max(worst, abs(closed - num) / num)
    el = time.perf_counter() - t0
    ok = worst <= 1e-6 and el < 1.0
    return ok, f"max rel err {worst:.2e} over 100 instances, {el:.2f}s (limit 1s)"


# -- 2 ----------------------------------------------------------------------

def criterion_2():
    rng = np.random.default_rng(2)
    m1 = m2 = math.inf
    t0 = time.perf_counter()
    for _ in range(20):
        K, a = 10 ** rng.uniform(-2, 1), rng.uniform(0.3, 2.5)
        g, H, c = rng.uniform(1.05, 4), rng.uniform(0.1, 0.9), 10 ** rng.uniform(-1, 1)
        sigma, tau = 10 ** rng.uniform(-1, 4), 10 ** rng.uniform(-2, 1)
        tb = power_law(K, a)
        x = tau * g ** np.arange(-400, 401, dtype=float)
        direct = float(np.sum(tb((sigma + c * x) / x**H)))
        m1 = min(m1, geometric_sum_bound_est1(tb, g, c, H, sigma) - direct)
    for _ in range(20):
        K, a = 10 ** rng.uniform(-2, 1), rng.uniform(0.3, 2.5)
        g, tau, c = rng.uniform(1.05, 4), 10 ** rng.uniform(-2, 1), 10 ** rng.uniform(-1, 1)
        sigma = c * tau / (g - 1) * 10 ** rng.uniform(0, 3)
        tb = power_law(K, a)
        y, direct = 0.0, 0.0
        for _ in range(400):
            y = tau + g * y
            direct += float(tb(sigma + c * y))
        m2 = min(m2, geometric_sum_bound_est2(tb, g, tau, c, sigma) - direct)
    el = time.perf_counter() - t0
    ok = m1 >= 0 and m2 >= 0 and el < 1.0
    return ok, f"min margin est1 {m1:.3e}, est2 {m2:.3e}, {el:.2f}s (limit 1s)"


# -- 3 ----------------------------------------------------------------------

def criterion_3():
    rng = np.random.default_rng(3)
    worst = 0.0
    t0 = time.perf_counter()
    for _ in range(50):
        alpha = rng.uniform(1.05, 1.95)
        H = rng.uniform(1 / alpha, 0.99)
        env = HtssEnvelope(10 ** rng.uniform(0, 8), H, alpha, 10 ** rng.uniform(-3, 3))
        mu = env.r * 10 ** rng.uniform(-2, 1)
        g = 1 + mu / env.r * np.linspace(0, 1, 10**4 + 2)[1:-1]
        grid = env.K * float(np.min(k_tilde_objective(env, mu, g)))
        kt = k_tilde(env, mu)
        worst = max(worst, abs(kt - grid) / grid)
    el = time.perf_counter() - t0
    ok = worst <= 1e-4 and el < 5.0
    return ok, f"max rel diff to 1e4-point grid {worst:.2e} on 50 instances, {el:.2f}s (limit 5s)"


# -- 4 ----------------------------------------------------------------------

def criterion_4():
    """Sample-path violations of two exact realizations of r t + b t^H S_alpha.

    Levy stable motion (H = 1/alpha, iid stable increments) and the
    single-draw path A(t) = r t + b t^H S (H = 0.8), 10^4 paths each,
    unit time step, horizon 2000 steps, mu = r.
    """
    t0 = time.perf_counter()
    alpha, r, b, mu, T, npaths = 1.6, 1.0, 1.0, 1.0, 2000, 10**4
    qt = quantile_table(StableSpec(alpha), DEFAULT_EPSILONS, 10**6, 99)
    rng = np.random.default_rng(4)
    t = np.arange(T + 1.0)
    parts, ok = [], True
    for H, kind in ((1 / alpha, "levy"), (0.8, "single-draw")):
        env = envelope_from_stable_quantiles(r, alpha, H, b, qt)
        tail = sample_path_envelope(env, mu).tail
        sups = np.empty(npaths)
        for k in range(0, npaths, 500):
            if kind == "levy":
                inc = r + b * _cms(alpha, rng, (500, T))
                A = np.concatenate([np.zeros((500, 1)), np.cumsum(inc, axis=1)], axis=1)
            else:
                A = r * t + b * t**H * _cms(alpha, rng, (500, 1))
            X = A - (r + mu) * t
            sups[k:k + 500] = X[:, -1] - X.min(axis=1)
        for lvl in (0.3, 0.1, 0.03):
            freq = float(np.mean(sups > tail.inverse(lvl)))
            ok &= freq <= lvl
            parts.append(f"{kind} {lvl}:{freq:.4f}")
    el = time.perf_counter() - t0
    ok &= el < 120
    return ok, "violation freq vs bound " + ", ".join(parts) + f", {el:.1f}s (limit 120s)"


# -- 5 ----------------------------------------------------------------------

def criterion_5():
    t0 = time.perf_counter()
    env = envelope_from_pareto(SRC.lambda_packets, B_BITS, 1.6)
    db = delay_bound(env, packetizer_curve(C, 1.6, B_BITS**1.6, 8 * 400, 0.75))
    est = run_tandem(TandemConfig(1, C, SRC, seed=5), 10**6)
    ok, parts = True, []
    for e in EPS:
        lo = lower_bound_quantile_pareto(1, B_BITS, 1.6, SRC.lambda_packets, e, C=C)
        emp = est.quantile(e)
        up = delay_quantile(db, e)
        ok &= lo <= emp <= up
        parts.append(f"eps={e:g}: {lo:.3g} <= {emp:.3g} <= {up:.3g}")
    slope = loglog_slope(db, 1.0, 1e3)
    ok &= abs(slope + 0.6) <= 0.02
    el = time.perf_counter() - t0
    ok &= el < 300
    return ok, "; ".join(parts) + f"; upper slope {slope:.4f} over [1,1e3]s, {el:.1f}s"


# -- 6 ----------------------------------------------------------------------

def criterion_6():
    t0 = time.perf_counter()
    base = PathSpec.from_json((CONFIGS / "pareto_tandem.json").read_text())
    Ns = (1, 2, 4, 8)
    dbs = {N: end_to_end_delay(base.replicate(N)) for N in Ns}
    w = np.logspace(-4, 6, 61)
    curves = [dbs[N](w) for N in Ns]
    nested = all(np.all(b >= a) for a, b in zip(curves, curves[1:]))
    below = True
    for N in Ns:
        est = run_tandem(TandemConfig(N, C, SRC, seed=60 + N), 10**6)
        c = est.ccdf.thinned(3000)
        pts = c.x[c.x > 0]
        below &= bool(np.all(c.prob[c.x > 0] <= dbs[N](pts)))
    gaps_ok, parts = True, []
    for e in EPS:
        ratio = [delay_quantile(dbs[N], e) / lower_bound_quantile_pareto(
            N, base.pareto.b, base.pareto.alpha, base.pareto.lambda_packets, e, C=C)
            for N in Ns]
        gaps_ok &= all(b > a for a, b in zip(ratio, ratio[1:]))
        parts.append(f"eps={e:g} upper/lower " + "/".join(f"{x:.3g}" for x in ratio))
    el = time.perf_counter() - t0
    ok = nested and below and gaps_ok and el < 1800
    return ok, (f"nested={nested}, empirical below upper={below}, gap increasing={gaps_ok}; "
                + "; ".join(parts) + f"; {el:.1f}s")


# -- 7 ----------------------------------------------------------------------

def criterion_7():
    t0 = time.perf_counter()
    Ns = [4, 8, 16, 32, 64]
    par = scaling_study(PathSpec.from_json((CONFIGS / "pareto_tandem.json").read_text()),
                        Ns, 0.1)
    wei = scaling_study(PathSpec.from_json((CONFIGS / "weibull_tandem.json").read_text()),
                        Ns, 0.1)
    a = 1.6
    ok_up = par.slope_upper <= (a + 1) / (a - 1) + 0.3
    ok_lo = abs(par.slope_lower - a / (a - 1)) <= 1e-9
    ok_w = abs(wei.slope_upper_normalized - 1.0) <= 0.15
    el = time.perf_counter() - t0
    ok = ok_up and ok_lo and ok_w and el < 600
    return ok, (f"pareto upper slope {par.slope_upper:.3f} (<= 4.633: {ok_up}), "
                f"lower slope {par.slope_lower:.4f} (= 2.6667: {ok_lo}), "
                f"weibull normalized slope {wei.slope_upper_normalized:.3f} "
                f"(1 +- 0.15: {ok_w}; raw {wei.slope_upper:.3f}), {el:.1f}s")


# -- 8 ----------------------------------------------------------------------

def criterion_8():
    """Pairs are drawn until 20 have a chain tail below 1 (capped pairs say nothing)."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(8)
    worst, pairs = math.inf, 0
    while pairs < 20:
        N = int(rng.integers(2, 65))
        L, beta, g = 10 ** rng.uniform(-2, 2), rng.uniform(0.2, 1.9), rng.uniform(1.05, 3)
        s = 10 ** rng.uniform(0, 14)
        chain = iterated_chain_tail(L, beta, N, g, s)
        if chain >= 1.0:
            continue
        net = float(network_service_curve(HtServiceCurve(1.0, power_law(L, beta)), N, g).tail(s))
        worst = min(worst, net / chain)
        pairs += 1
    el = time.perf_counter() - t0
    ok = worst >= 1.0 and el < 10
    return ok, f"min network/chain tail ratio {worst:.3f} over 20 (N, sigma) pairs, {el:.2f}s"


# -- 9 ----------------------------------------------------------------------

def criterion_9():
    t0 = time.perf_counter()
    curves = load_ccdf_fixture(resources.files("htssnc") / "data" / "reference_y_ccdf.csv")
    K = fit_from_ccdfs(curves, 465e6, 1.98, 0.93).K
    el = time.perf_counter() - t0
    ok = abs(K / 1225 - 1) <= 0.1 and el < 10
    return ok, f"fitted K {K:.1f} vs 1225 ({100 * (K / 1225 - 1):+.1f}%), {el:.2f}s"


# -- 10 ---------------------------------------------------------------------

def criterion_10():
    t0 = time.perf_counter()
    cfg = TandemConfig(1, C, SRC, seed=10)
    a = run_tandem(cfg, 10**4)
    ref = lindley_delays(a.arrival_times, a.sizes_bits, C)
    err = float(np.max(np.abs(a.samples - ref) / ref))
    b = run_tandem(cfg, 10**4)
    same = a.samples.tobytes() == b.samples.tobytes() and a.ccdf.to_csv() == b.ccdf.to_csv()
    el = time.perf_counter() - t0
    ok = err <= 1e-9 and same and el < 5
    return ok, f"max rel diff to Lindley {err:.2e}, replay identical={same}, {el:.2f}s"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9, criterion_10]


@pytest.mark.parametrize("n", [pytest.param(n, marks=pytest.mark.slow) if n in (5, 6) else n
                               for n in range(1, 11)])
def test_criterion(n):
    ok, detail, el = timed(CRITERIA[n - 1])
    report(n, ok, detail, el)
    assert ok, detail


if __name__ == "__main__":
    results = []
    for i, fn in enumerate(CRITERIA, start=1):
        ok, detail, el = timed(fn)
        report(i, ok, detail, el)
        results.append(ok)
    sys.exit(0 if all(results) else 1)
