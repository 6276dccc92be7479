"""Growth of delay quantiles with path length for Pareto and Gaussian-tail traffic."""

import argparse
from pathlib import Path

from htssnc.network import PathSpec, scaling_study

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--nodes", default="2,4,8,16,32,64")
    ap.add_argument("--eps", default="0.1,0.001")
    ap.add_argument("--out", type=Path, default=Path("results"))
    a = ap.parse_args()
    a.out.mkdir(parents=True, exist_ok=True)
    Ns = [int(x) for x in a.nodes.split(",")]

    for name in ("pareto_tandem", "weibull_tandem"):
        path = PathSpec.from_json((CONFIGS / f"{name}.json").read_text())
        for eps in (float(e) for e in a.eps.split(",")):
            try:
                st = scaling_study(path, Ns, eps)
            except ValueError as exc:
                print(f"{name} eps={eps:g}: {exc}")
                continue
            (a.out / f"scaling_{name}_eps{eps:g}.csv").write_text(st.to_csv())
            norm = ("" if st.slope_upper_normalized is None
                    else f" normalized {st.slope_upper_normalized:.3f}")
            lower = "" if st.slope_lower is None else f" lower {st.slope_lower:.4f}"
            print(f"{name} eps={eps:g}: upper slope {st.slope_upper:.3f}{lower}{norm}")


if __name__ == "__main__":
    main()
