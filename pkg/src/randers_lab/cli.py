"""Command-line entry point: one binary wiring spaces, winds, and the
experiment verbs; deterministic given --seed, reports carry the config
hash and library version but never timestamps.

Exit codes: 0 = success / verdict passed, 1 = verdict failed,
2 = usage or configuration error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, ExperimentConfig
from .cw import (
    SearchFailed,
    cw_connect,
    cw_displacement_check,
    direction_exhaustion_check,
)
from .geodesics import f_distance, f_geodesic_flowcurve, f_geodesic_ode
from .killing import constant_length_family, killing_from_config, zero_field
from .oracle import build_graph, oracle_distance
from .randers import NavigationData, from_navigation, to_navigation
from .reports import geodesic_rows, polyline_svg, histogram_svg, render_json, write_csv
from .selftest import run_selftest
from .spaces import SpaceError, space_from_config


def _json_arg(s):
    """Inline JSON, or @path / bare path to a JSON file."""
    if s is None:
        return None
    s = s.strip()
    if s.startswith("@"):
        return json.loads(Path(s[1:]).read_text())
    try:
        return json.loads(s)
    except json.JSONDecodeError:
        return json.loads(Path(s).read_text())


def _nav_from_args(args) -> tuple[NavigationData, ExperimentConfig]:
    space_cfg = _json_arg(args.space)
    if space_cfg is None:
        raise ConfigError("--space is required")
    space = space_from_config(space_cfg)
    wind_cfg = _json_arg(getattr(args, "wind", None))
    wind = killing_from_config(space, wind_cfg) if wind_cfg is not None else zero_field(space)
    cfg = ExperimentConfig(space=space_cfg, wind=wind_cfg, seed=args.seed,
                           tol=args.tol, out=args.out, fmt=args.format)
    return NavigationData(space, wind), cfg


def _emit(args, name: str, result: dict, cfg: ExperimentConfig) -> None:
    text = render_json(result, cfg)
    sys.stdout.write(text)
    if args.out:
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        (outdir / f"{name}.json").write_text(text)


def cmd_convert(args) -> int:
    nav, cfg = _nav_from_args(args)
    x = np.asarray(_json_arg(args.point), dtype=float)
    df = from_navigation(nav, x)
    h, wc, wamb = to_navigation(df)
    result = {
        "a": df.a.tolist(),
        "b": df.b.tolist(),
        "h": h.tolist(),
        "W": wamb.tolist(),
        "lambda": float(nav.lam(x)),
        "frame": df.frame.tolist(),
    }
    _emit(args, "convert", result, cfg)
    return 0


def cmd_norm(args) -> int:
    nav, cfg = _nav_from_args(args)
    x = np.asarray(_json_arg(args.point), dtype=float)
    y = np.asarray(_json_arg(args.vector), dtype=float)
    df = from_navigation(nav, x)
    result = {
        "F_navigation": float(nav.finsler_norm(x, y)),
        "F_defining": df.norm_defining(nav.space, y),
        "lambda": float(nav.lam(x)),
    }
    _emit(args, "norm", result, cfg)
    return 0


def cmd_distance(args) -> int:
    nav, cfg = _nav_from_args(args)
    x = np.asarray(_json_arg(args.x), dtype=float)
    y = np.asarray(_json_arg(args.y), dtype=float)
    result = {"d_xy": f_distance(nav, x, y), "d_yx": f_distance(nav, y, x)}
    _emit(args, "distance", result, cfg)
    return 0


def cmd_geodesic(args) -> int:
    nav, cfg = _nav_from_args(args)
    x = np.asarray(_json_arg(args.x), dtype=float)
    y = np.asarray(_json_arg(args.direction), dtype=float)
    y = y / nav.finsler_norm(x, y)  # normalize to unit F-speed
    if args.method == "flow":
        curve = f_geodesic_flowcurve(nav, x, y, T=args.T, n_steps=args.steps)
    else:
        curve = f_geodesic_ode(nav, x, y, T=args.T, step=args.step)
    result = {
        "method": curve.kind,
        "T": args.T,
        "n_points": len(curve),
        "endpoint": curve.points[-1].tolist(),
        "diverged": bool(curve.diverged),
    }
    _emit(args, "geodesic", result, cfg)
    if args.out:
        outdir = Path(args.out)
        if args.format == "csv":
            dim = curve.points.shape[1]
            write_csv(outdir / "geodesic.csv", ["t"] + [f"x{i}" for i in range(dim)],
                      geodesic_rows(curve))
        if args.format == "svg":
            (outdir / "geodesic.svg").write_text(polyline_svg(curve.points))
    return 0


def cmd_flow(args) -> int:
    nav, cfg = _nav_from_args(args)
    field_cfg = _json_arg(args.field)
    X = killing_from_config(nav.space, field_cfg) if field_cfg is not None else nav.wind
    x = np.asarray(_json_arg(args.point), dtype=float)
    result = {"point": X.flow(x, args.t).tolist(), "t": args.t}
    _emit(args, "flow", result, cfg)
    return 0


def cmd_cw_check(args) -> int:
    nav, cfg = _nav_from_args(args)
    field_cfg = _json_arg(args.field)
    if field_cfg is not None:
        Y = killing_from_config(nav.space, field_cfg)
    else:
        family = constant_length_family(nav)
        rng = np.random.default_rng(args.seed)
        Y = family.random_member(rng, 1.0) + nav.wind
    rep = cw_displacement_check(nav, (Y, args.t), n_samples=args.samples,
                                tol=args.tol, seed=args.seed)
    _emit(args, "cw-check", rep.to_dict(), cfg)
    if args.out and args.format == "svg":
        (Path(args.out) / "cw-displacements.svg").write_text(
            histogram_svg(rep.displacements))
    return 0 if rep.is_cw else 1


def cmd_exhaust(args) -> int:
    nav, cfg = _nav_from_args(args)
    if args.point is not None:
        x = np.asarray(_json_arg(args.point), dtype=float)
    else:
        x = nav.space.sample(np.random.default_rng(args.seed), 1)[0]
    rep = direction_exhaustion_check(nav, x, n_directions=args.directions,
                                     tol=args.tol, seed=args.seed)
    _emit(args, "exhaust", rep.to_dict(), cfg)
    return 0 if rep.passed else 1


def cmd_connect(args) -> int:
    nav, cfg = _nav_from_args(args)
    x0 = np.asarray(_json_arg(args.x0), dtype=float)
    x1 = np.asarray(_json_arg(args.x1), dtype=float)
    try:
        res = cw_connect(nav, x0, x1, tol=args.tol)
    except SearchFailed as e:
        _emit(args, "connect", {"failed": True, "best_residual": e.best_residual}, cfg)
        return 1
    result = {
        "t": res.t,
        "residual": res.residual,
        "method": res.method,
        "member": res.member.to_config(),
    }
    _emit(args, "connect", result, cfg)
    return 0


def cmd_oracle(args) -> int:
    nav, cfg = _nav_from_args(args)
    g = build_graph(nav, args.nodes, args.k, seed=args.seed, cache_dir=args.cache)
    if args.oracle_cmd == "build":
        result = {"graph_hash": g.graph_hash, "eps": g.eps,
                  "n_nodes": g.n_nodes, "k": g.k, "n_edges": int(len(g.weights))}
        _emit(args, "oracle-build", result, cfg)
        return 0
    x = np.asarray(_json_arg(args.x), dtype=float)
    y = np.asarray(_json_arg(args.y), dtype=float)
    est, hint = oracle_distance(g, nav, x, y)
    _emit(args, "oracle-query", {"estimate": est, "error_hint": hint}, cfg)
    return 0


def cmd_selftest(args) -> int:
    chosen = [int(c) for c in args.criteria.split(",")] if args.criteria else None
    results = run_selftest(chosen, cache_dir=args.cache)
    for r in results:
        status = "PASS" if r["passed"] else "FAIL"
        print(f"CRITERION {r['criterion']}: {status} ({r['name']})")
    if args.out:
        space_cfg = {"kind": "euclidean", "n": 2}
        cfg = ExperimentConfig(space=space_cfg, seed=args.seed, tol=args.tol,
                               out=args.out, fmt=args.format,
                               params={"criteria": args.criteria or "all"})
        text = render_json({"results": results}, cfg)
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        (outdir / "selftest.json").write_text(text)
    return 0 if all(r["passed"] for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="randers-lab",
                                description="Randers navigation-data toolkit")
    p.add_argument("--version", action="version", version=f"randers-lab {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, wind=True):
        sp.add_argument("--space", help="space JSON (inline, @file, or path)")
        if wind:
            sp.add_argument("--wind", help="wind field JSON (inline, @file, or path)")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--tol", type=float, default=1e-6)
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--format", choices=["json", "csv", "svg"], default="json")

    sp = sub.add_parser("convert", help="navigation data -> defining form at a point")
    common(sp)
    sp.add_argument("--point", required=True)
    sp.set_defaults(func=cmd_convert)

    sp = sub.add_parser("norm", help="Finsler norm of a tangent vector")
    common(sp)
    sp.add_argument("--point", required=True)
    sp.add_argument("--vector", required=True)
    sp.set_defaults(func=cmd_norm)

    sp = sub.add_parser("distance", help="asymmetric distance between two points")
    common(sp)
    sp.add_argument("--x", required=True)
    sp.add_argument("--y", required=True)
    sp.set_defaults(func=cmd_distance)

    sp = sub.add_parser("geodesic", help="trace an F-geodesic")
    common(sp)
    sp.add_argument("--x", required=True)
    sp.add_argument("--direction", required=True)
    sp.add_argument("--T", type=float, default=1.0)
    sp.add_argument("--step", type=float, default=1e-3, help="ODE step")
    sp.add_argument("--steps", type=int, default=200, help="flow-curve samples")
    sp.add_argument("--method", choices=["flow", "ode"], default="flow")
    sp.set_defaults(func=cmd_geodesic)

    sp = sub.add_parser("flow", help="flow a point along a Killing field")
    common(sp)
    sp.add_argument("--field", help="field JSON (defaults to the wind)")
    sp.add_argument("--point", required=True)
    sp.add_argument("--t", type=float, default=1.0)
    sp.set_defaults(func=cmd_flow)

    sp = sub.add_parser("cw-check", help="displacement-constancy check of a flow")
    common(sp)
    sp.add_argument("--field", help="full field to flow (default: family member + wind)")
    sp.add_argument("--t", type=float, default=0.1)
    sp.add_argument("--samples", type=int, default=100)
    sp.set_defaults(func=cmd_cw_check, tol=1e-4)  # relative spread verdict

    sp = sub.add_parser("exhaust", help="direction exhaustion check")
    common(sp)
    sp.add_argument("--point")
    sp.add_argument("--directions", type=int, default=50)
    sp.set_defaults(func=cmd_exhaust)

    sp = sub.add_parser("connect", help="CW-connect two points")
    common(sp)
    sp.add_argument("--x0", required=True)
    sp.add_argument("--x1", required=True)
    sp.set_defaults(func=cmd_connect)

    sp = sub.add_parser("oracle", help="epsilon-net distance oracle")
    oracle_sub = sp.add_subparsers(dest="oracle_cmd", required=True)
    for name in ("build", "query"):
        osp = oracle_sub.add_parser(name)
        common(osp)
        osp.add_argument("--nodes", type=int, default=10000)
        osp.add_argument("--k", type=int, default=64)
        osp.add_argument("--cache", help="cache directory (default: $RANDERS_LAB_CACHE)")
        if name == "query":
            osp.add_argument("--x", required=True)
            osp.add_argument("--y", required=True)
        osp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("selftest", help="run the acceptance criteria")
    common(sp)
    sp.add_argument("--criteria", help="comma-separated subset, e.g. 1,2,5")
    sp.add_argument("--cache", help="oracle cache directory")
    sp.set_defaults(func=cmd_selftest)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, SpaceError, ValueError, OSError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
