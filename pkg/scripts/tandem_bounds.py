"""Tandems of N = 1, 2, 4, 8 identical nodes: bound curves and simulated CCDFs."""

import argparse
from pathlib import Path

import numpy as np

from htssnc.bounds import delay_quantile, lower_bound_quantile_pareto
from htssnc.network import PathSpec, end_to_end_delay
from htssnc.sim import ParetoGen, TandemConfig, run_tandem

CONFIG = Path(__file__).resolve().parents[1] / "configs" / "pareto_tandem.json"


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--packets", type=float, default=1e6)
    ap.add_argument("--nodes", default="1,2,4,8")
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--out", type=Path, default=Path("results"))
    a = ap.parse_args()
    a.out.mkdir(parents=True, exist_ok=True)

    base = PathSpec.from_json(CONFIG.read_text())
    p, C = base.pareto, base.nodes[0].C
    src = ParetoGen(p.lambda_packets, p.b / 8, p.alpha)
    w = np.logspace(-4, 8, 121)
    rows = ["N,w_s,prob_bound"]
    print("N  eps    lower_s      sim_s        upper_s")
    for N in (int(x) for x in a.nodes.split(",")):
        db = end_to_end_delay(base.replicate(N))
        rows += [f"{N},{x:.6e},{v:.6e}" for x, v in zip(w, db(w))]
        est = run_tandem(TandemConfig(N, C, src, seed=a.seed + N), int(a.packets))
        (a.out / f"tandem_sim_N{N}.csv").write_text(est.ccdf.thinned(2000).to_csv({"N": N}))
        for eps in (1e-1, 1e-2):
            lo = lower_bound_quantile_pareto(N, p.b, p.alpha, p.lambda_packets, eps, C=C)
            print(f"{N:<2} {eps:<6g} {lo:<12.4e} {est.quantile(eps):<12.4e} "
                  f"{delay_quantile(db, eps):.4e}")
    (a.out / "tandem_upper.csv").write_text("\n".join(rows) + "\n")


if __name__ == "__main__":
    main()
