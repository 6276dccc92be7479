"""Single node at 75% load: upper bound, lower-bound quantiles and simulated CCDF."""

import argparse
from pathlib import Path

import numpy as np

from htssnc.bounds import bound_csv, delay_quantile, lower_bound_quantile_pareto, loglog_slope
from htssnc.network import PathSpec, path_bound
from htssnc.sim import ParetoGen, TandemConfig, run_tandem

CONFIG = Path(__file__).resolve().parents[1] / "configs" / "single_node.json"


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--packets", type=float, default=1e6)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--out", type=Path, default=Path("results"))
    a = ap.parse_args()
    a.out.mkdir(parents=True, exist_ok=True)

    path = PathSpec.from_json(CONFIG.read_text())
    db = path_bound(path).delay
    p = path.pareto
    C = path.nodes[0].C
    (a.out / "single_node_upper.csv").write_text(bound_csv(db, np.logspace(-4, 4, 81)))

    src = ParetoGen(p.lambda_packets, p.b / 8, p.alpha)
    est = run_tandem(TandemConfig(1, C, src, seed=a.seed), int(a.packets))
    (a.out / "single_node_sim.csv").write_text(est.ccdf.thinned(2000).to_csv({"seed": a.seed}))

    print(f"upper-bound slope over [1, 1e3] s: {loglog_slope(db, 1, 1e3):.4f}")
    print("eps      lower_s      sim_s        upper_s")
    for eps in (1e-1, 3e-2, 1e-2, 1e-3):
        lo = lower_bound_quantile_pareto(1, p.b, p.alpha, p.lambda_packets, eps, C=C)
        sim = est.quantile(eps) if eps >= est.max_reliable_eps else float("nan")
        print(f"{eps:<8g} {lo:<12.4e} {sim:<12.4e} {delay_quantile(db, eps):.4e}")


if __name__ == "__main__":
    main()
