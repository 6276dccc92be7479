"""Envelopes of r t + b t^H S_alpha from the tail asymptote and from quantiles.

r = 75 Mbps, alpha = 1.6, H = 0.8, b = 60 Mbps. Writes one CSV with both
families at eps = 1e-1, 1e-2, 1e-3 over t in (0, 1] s.
"""

import argparse
from pathlib import Path

import numpy as np

from htssnc.envelopes import envelope_from_stable, envelope_from_stable_quantiles
from htssnc.stable import DEFAULT_EPSILONS, StableSpec, quantile_table

R, ALPHA, H, B = 75e6, 1.6, 0.8, 60e6
EPS = (1e-1, 1e-2, 1e-3)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=10**6)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", type=Path, default=Path("results/stable_envelopes.csv"))
    a = ap.parse_args()

    qt = quantile_table(StableSpec(ALPHA), sorted(set(DEFAULT_EPSILONS) | set(EPS)),
                        a.samples, a.seed)
    tail = envelope_from_stable(R, ALPHA, H, B)
    quant = envelope_from_stable_quantiles(R, ALPHA, H, B, qt)
    t = np.linspace(0.01, 1.0, 100)
    cols = {f"tail_eps={e:g}": tail.curve(t, e) for e in EPS}
    cols |= {f"quantile_eps={e:g}": quant.curve(t, e) for e in EPS}

    a.out.parent.mkdir(parents=True, exist_ok=True)
    with a.out.open("w") as fh:
        fh.write(f"# K_tail={tail.K:.6e} K_quantile={quant.K:.6e} samples={a.samples}\n")
        fh.write("t_s," + ",".join(cols) + "\n")
        for i, ti in enumerate(t):
            fh.write(f"{ti:.4f}," + ",".join(f"{c[i] / 1e6:.6f}" for c in cols.values()) + "\n")
    print(f"K tail {tail.K:.4e}  K quantile {quant.K:.4e}  (Mbit columns) -> {a.out}")


if __name__ == "__main__":
    main()
