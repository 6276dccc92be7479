"""Command-line entry point: ``htssnc {envelope,bound,simulate,scale}``.

Exit codes: 0 success, 2 usage, 3 instability or domain error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from importlib import resources
from pathlib import Path

import numpy as np

from . import bounds, envelopes, network, sim, stable, traces

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_IO = 0, 2, 3, 4
MBPS = 1e6


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _ints(text: str) -> list[int]:
    return [int(x) for x in _floats(text)]


def _count(text: str) -> int:
    try:
        v = float(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from exc
    if v != int(v) or v < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {text!r}")
    return int(v)


def _header(args: argparse.Namespace, extra: dict | None = None) -> dict:
    h = {"command": f"htssnc {args.command}" + (f" {args.kind}" if getattr(args, "kind", None) else "")}
    for k, v in sorted(vars(args).items()):
        if k in ("command", "kind", "func", "out", "report") or v is None:
            continue
        h[k] = ",".join(map(str, v)) if isinstance(v, list) else v
    h.update(extra or {})
    return h


def _header_lines(h: dict) -> str:
    return "".join(f"# {k}={v}\n" for k, v in h.items())


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# -- envelope ---------------------------------------------------------------

def _curve_table(env, eps_list, t_max_ms: float, points: int, header: dict) -> str:
    t = np.linspace(t_max_ms / points, t_max_ms, points) / 1e3
    cols = [env.curve(t, e) for e in eps_list]
    lines = [_header_lines(header), "t_ms," + ",".join(f"G_bits_eps={e:g}" for e in eps_list) + "\n"]
    for i, ti in enumerate(t):
        lines.append(f"{ti * 1e3:.6g}," + ",".join(f"{c[i]:.6e}" for c in cols) + "\n")
    return "".join(lines)


def cmd_envelope(args) -> int:
    kind = args.kind
    report: dict
    if kind in ("stable-tail", "stable-quantile"):
        b = args.b_mbps * MBPS
        r = args.r_mbps * MBPS
        if kind == "stable-tail":
            env = envelopes.envelope_from_stable(r, args.alpha, args.hurst, b)
        else:
            eps_tab = sorted(set(stable.DEFAULT_EPSILONS) | set(args.eps))
            qt = stable.quantile_table(stable.StableSpec(args.alpha), eps_tab,
                                       args.samples, args.seed)
            env = envelopes.envelope_from_stable_quantiles(r, args.alpha, args.hurst, b, qt)
        report = envelopes.envelope_dict(env)
    elif kind == "pareto-gclt":
        b = 8.0 * args.b_bytes
        lam = args.rate_mbps * MBPS / envelopes.pareto_mean(b, args.alpha)
        env = envelopes.envelope_from_pareto(lam, b, args.alpha)
        report = envelopes.envelope_dict(env) | {"lambda_pps": lam}
    elif kind == "trace-fit":
        windows = [w / 1e3 for w in args.windows_ms]
        if args.ccdf_fixture:
            path = (resources.files("htssnc") / "data" / "reference_y_ccdf.csv"
                    if args.ccdf_fixture == "builtin" else args.ccdf_fixture)
            curves = traces.load_ccdf_fixture(path)
            fit = traces.fit_from_ccdfs(curves, args.r_mbps * MBPS, args.alpha, args.hurst,
                                        args.include_unreliable)
        else:
            if not args.trace:
                raise _Usage("trace-fit needs --trace or --ccdf-fixture")
            tr = traces.ingest(args.trace)
            stride = None if args.stride_ms is None else args.stride_ms / 1e3
            fit = traces.fit_htss_K(tr, args.r_mbps * MBPS, args.alpha, args.hurst, windows,
                                    stride, args.include_unreliable, args.unit_bits)
        report = fit.report()
        if args.report:
            Path(args.report).write_text(json.dumps(report, indent=2) + "\n")
        header = _header(args, {"K": fit.K})
        t = np.linspace(args.t_max_ms / args.points, args.t_max_ms, args.points) / 1e3
        lines = [_header_lines(header),
                 "t_ms," + ",".join(f"G_eps={e:g}" for e in args.eps) + "\n"]
        for ti in t:
            vals = [fit.r / args.unit_bits * ti + fit.sigma_at(e) * ti**fit.H for e in args.eps]
            lines.append(f"{ti * 1e3:.6g}," + ",".join(f"{v:.6e}" for v in vals) + "\n")
        _emit("".join(lines), args.out)
        return EXIT_OK
    elif kind == "deterministic-trace":
        if not args.trace:
            raise _Usage("deterministic-trace needs --trace")
        tr = traces.ingest(args.trace)
        table = traces.deterministic_envelope(tr, args.horizon_ms / 1e3, args.step_ms / 1e3)
        _emit(table.to_csv(_header(args, tr.summary())), args.out)
        return EXIT_OK
    else:
        raise _Usage(f"unknown envelope kind {kind}")
    if args.report:
        Path(args.report).write_text(json.dumps(report, indent=2) + "\n")
    _emit(_curve_table(env, args.eps, args.t_max_ms, args.points,
                       _header(args, {"K": report["K"]})), args.out)
    return EXIT_OK


# -- bound --------------------------------------------------------------------

def _load_path(path: str) -> network.PathSpec:
    return network.PathSpec.from_json(Path(path).read_text())


def cmd_bound(args) -> int:
    path = _load_path(args.topology)
    Ns = args.nodes or [path.N]
    w = np.geomspace(args.w_min_s, args.w_max_s, args.points)
    rows, qlines = [], []
    for N in Ns:
        p = path if (N == path.N and not args.nodes) else path.replicate(N)
        db = network.end_to_end_delay(p)
        for wi in w:
            rows.append(f"{N},{wi:.6e},{db.two_term(wi):.6e}\n")
        for e in args.eps:
            up = bounds.delay_quantile(db, e)
            lo = ""
            if path.pareto is not None and all(n.cross is None for n in p.nodes) and e < 1:
                lo = f"{bounds.lower_bound_quantile_pareto(N, path.pareto.b, path.pareto.alpha, path.pareto.lambda_packets, e, C=p.nodes[0].C):.6e}"
            qlines.append(f"# quantile N={N} eps={e:g} w_upper_s={up:.6e} w_lower_s={lo}\n")
    text = _header_lines(_header(args)) + "".join(qlines) + "N,w_s,prob_bound\n" + "".join(rows)
    _emit(text, args.out)
    return EXIT_OK


# -- simulate -----------------------------------------------------------------

def cmd_simulate(args) -> int:
    cfg = sim.TandemConfig.from_json(Path(args.config).read_text())
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.warmup is not None:
        changes["warmup_packets"] = args.warmup
    if changes:
        cfg = replace(cfg, **changes)
    est = sim.run_tandem(cfg, args.packets)
    c = est.ccdf.thinned(args.max_points) if args.max_points else est.ccdf
    extra = {"samples": est.ccdf.n, "max_reliable_eps": est.max_reliable_eps,
             "config": json.dumps(cfg.to_dict(), sort_keys=True)}
    _emit(c.to_csv(_header(args, extra)), args.out)
    return EXIT_OK


# -- scale --------------------------------------------------------------------

def cmd_scale(args) -> int:
    path = _load_path(args.topology)
    st = network.scaling_study(path, args.nodes, args.eps)
    _emit(st.to_csv(_header(args)), args.out)
    for name in ("slope_upper", "slope_lower", "slope_upper_normalized"):
        v = getattr(st, name)
        if v is not None:
            print(f"{name}={v:.4f}", file=sys.stderr)
    return EXIT_OK


# -- parser -------------------------------------------------------------------

class _Usage(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="htssnc", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("envelope", help="traffic envelopes as G(t) tables")
    e.add_argument("kind", choices=["stable-tail", "stable-quantile", "pareto-gclt",
                                    "trace-fit", "deterministic-trace"])
    e.add_argument("--r-mbps", type=float)
    e.add_argument("--alpha", type=float)
    e.add_argument("--hurst", type=float)
    e.add_argument("--b-mbps", type=float, help="stable scale (Mbit/s^H)")
    e.add_argument("--b-bytes", type=float, help="Pareto scale")
    e.add_argument("--rate-mbps", type=float, help="Pareto source rate")
    e.add_argument("--eps", type=_floats, default=[1e-1, 1e-2, 1e-3])
    e.add_argument("--t-max-ms", type=float, default=1000.0)
    e.add_argument("--points", type=int, default=100)
    e.add_argument("--samples", type=_count, default=100_000)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--trace")
    e.add_argument("--ccdf-fixture", help="'builtin' or a sigma,prob,window_ms,n_windows CSV")
    e.add_argument("--windows-ms", type=_floats, default=[10.0, 100.0, 1000.0])
    e.add_argument("--stride-ms", type=float)
    e.add_argument("--unit-bits", type=float, default=1.0, help="1e6 to measure Y in Mbit")
    e.add_argument("--include-unreliable", action="store_true")
    e.add_argument("--horizon-ms", type=float, default=100.0)
    e.add_argument("--step-ms", type=float, default=1.0)
    e.add_argument("--out")
    e.add_argument("--report", help="write the JSON report here")
    e.set_defaults(func=cmd_envelope)

    b = sub.add_parser("bound", help="delay bound curves and quantiles for a topology")
    b.add_argument("--topology", required=True)
    b.add_argument("--nodes", type=_ints, help="replicate the first node for each N")
    b.add_argument("--eps", type=_floats, default=[1e-1, 1e-2, 1e-3])
    b.add_argument("--w-min-s", type=float, default=1e-4)
    b.add_argument("--w-max-s", type=float, default=1e4)
    b.add_argument("--points", type=int, default=81)
    b.add_argument("--out")
    b.set_defaults(func=cmd_bound)

    s = sub.add_parser("simulate", help="tandem simulation, delay CCDF")
    s.add_argument("--config", required=True)
    s.add_argument("--packets", type=_count, required=True)
    s.add_argument("--seed", type=int)
    s.add_argument("--warmup", type=_count)
    s.add_argument("--max-points", type=int, default=2000, help="0 keeps every point")
    s.add_argument("--out")
    s.set_defaults(func=cmd_simulate)

    c = sub.add_parser("scale", help="delay quantiles against path length")
    c.add_argument("--topology", required=True)
    c.add_argument("--nodes", type=_ints, default=[4, 8, 16, 32, 64])
    c.add_argument("--eps", type=float, default=0.1)
    c.add_argument("--out")
    c.set_defaults(func=cmd_scale)
    return p


_REQUIRED = {
    "stable-tail": ("r_mbps", "alpha", "hurst", "b_mbps"),
    "stable-quantile": ("r_mbps", "alpha", "hurst", "b_mbps"),
    "pareto-gclt": ("alpha", "b_bytes", "rate_mbps"),
    "trace-fit": ("r_mbps", "alpha", "hurst"),
    "deterministic-trace": (),
}
_FORBIDDEN = {
    "stable-tail": ("b_bytes", "rate_mbps", "trace"),
    "stable-quantile": ("b_bytes", "rate_mbps", "trace"),
    "pareto-gclt": ("b_mbps", "r_mbps", "hurst", "trace"),
    "trace-fit": ("b_mbps", "b_bytes", "rate_mbps"),
    "deterministic-trace": ("b_mbps", "b_bytes", "rate_mbps"),
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "envelope":
        missing = [f"--{k.replace('_', '-')}" for k in _REQUIRED[args.kind]
                   if getattr(args, k) is None]
        extra = [f"--{k.replace('_', '-')}" for k in _FORBIDDEN[args.kind]
                 if getattr(args, k) is not None]
        if missing:
            parser.error(f"envelope {args.kind} requires {', '.join(missing)}")
        if extra:
            parser.error(f"envelope {args.kind} does not accept {', '.join(extra)}")
    try:
        return args.func(args)
    except _Usage as exc:
        parser.error(str(exc))
    except OSError as exc:
        print(f"htssnc: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, TypeError) as exc:
        print(f"htssnc: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
