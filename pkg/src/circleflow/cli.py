"""``circleflow`` command line.

Exit codes: 0 success / converged, 2 ran but did not converge (or the input
is not converged), 1 usage or configuration error.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import math
import re
import sys
from pathlib import Path

import numpy as np

from . import complex as cplx
from . import generators as gen
from . import layout as lay
from .curvature import PackingMetric, prescribed_curvature_hat
from .complex import build_exhaustion
from .flow import (FlowConfig, FlowTrace, IntegratorFailure, InsufficientData, PreconditionError,
                   fit_exponential_rate, fit_power_law,
                   initial_metric_hyperbolic_character, initial_metric_perturbed, integrate,
                   run_manifest, thread_count, truncation_sweep, write_trace_csv)
from .geometry import Background, DomainError

EXIT_OK, EXIT_USAGE, EXIT_UNCONVERGED = 0, 1, 2

_ANGLE = re.compile(r"^\s*([+-]?(?:\d+(?:\.\d*)?|\.\d+)?)\s*\*?\s*pi\s*(?:/\s*(\d+(?:\.\d*)?))?\s*$")


class UsageError(Exception):
    pass


def parse_angle(text) -> float:
    """Radians from ``"1.57"``, ``"pi/2"``, ``"2pi/3"`` or ``"2*pi/3"``."""
    if isinstance(text, (int, float)):
        return float(text)
    m = _ANGLE.match(str(text))
    if m:
        k = m.group(1)
        k = 1.0 if k in ("", "+") else -1.0 if k == "-" else float(k)
        d = float(m.group(2)) if m.group(2) else 1.0
        return k * math.pi / d
    try:
        return float(text)
    except ValueError:
        raise UsageError(f"cannot parse angle {text!r}") from None


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def _write_json(path, doc) -> None:
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _load_complex(path) -> cplx.CellComplex:
    try:
        return cplx.load(path)
    except FileNotFoundError:
        raise UsageError(f"no such complex file: {path}") from None
    except (json.JSONDecodeError, KeyError, cplx.ComplexError) as exc:
        raise UsageError(f"invalid complex file {path}: {exc}") from None


# ----------------------------------------------------------------------
# metric and trace files


def metric_to_json(cx, metric: PackingMetric) -> dict:
    return {"background": metric.background.value,
            "vertex_ids": [cplx._json_id(v) for v in cx.vertex_ids],
            "u": [None if not np.isfinite(x) else float(x) for x in metric.u]}


def metric_from_json(doc) -> PackingMetric:
    return PackingMetric(doc["background"], [np.nan if x is None else x for x in doc["u"]])


def save_trace(trace: FlowTrace, path) -> None:
    np.savez_compressed(path, times=trace.times, residual=trace.residual, energy=trace.energy,
                        u_min=trace.u_min, u_max=trace.u_max, snap_times=trace.snap_times,
                        u_free=trace.u_free, K_free=trace.K_free, free=trace.free, u0=trace.u0,
                        status=np.array(trace.status), converged=np.array(trace.converged))


# ----------------------------------------------------------------------
# config resolution

FLOW_DEFAULTS = {
    "geometry": "euclidean", "theta_const": None, "init": "constant", "r0": 1.0, "perturb": 0.05,
    "perturb_norm": "l2", "seed": 0, "c_hat": 0.5, "k_hat": "zero", "integrator": "rk45", "dt": 1e-2,
    "t_max": 1e4, "tol": 1e-10, "step_tol": 1e-8, "root": None, "free_radius": None,
    "exhaustion": None, "snapshot_every": 1,
}


def resolve(args, defaults: dict) -> dict:
    """Flags beat the ``--config`` file, which beats the defaults."""
    cfg = dict(defaults)
    if getattr(args, "config", None):
        try:
            doc = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        unknown = set(doc) - set(defaults)
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(doc)
    for k in defaults:
        v = getattr(args, k, None)
        if v is not None:
            cfg[k] = v
    return cfg


# ----------------------------------------------------------------------
# commands


def cmd_generate(args) -> int:
    params = {}
    for key in ("radius", "depth", "p", "q", "n", "center", "max_faces"):
        v = getattr(args, key)
        if v is not None:
            params[key] = v
    if args.theta is not None:
        params["theta"] = parse_angle(args.theta)
    try:
        cx = gen.generate(args.name, **params)
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from None
    except TypeError as exc:
        raise UsageError(f"bad parameters for {args.name}: {exc}") from None
    if args.infinity_face is not None:
        cx = cx.with_infinity(face=args.infinity_face)
    doc = cplx.to_json(cx)
    if args.output:
        _write_json(args.output, doc)
    else:
        sys.stdout.write(json.dumps(doc, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_validate(args) -> int:
    cx = _load_complex(args.complex)
    bad = cplx.validate_rivin_vertex_sums(cx, args.tol) if args.rivin else cplx.validate_c1(cx, args.tol)
    interior = sorted(cx.interior_vertices)
    nc = [cplx.normalized_character(cx, cx.vertex_ids[v], exclude_infinity=True) for v in interior]
    report = {
        "vertices": cx.n_vertices, "edges": cx.n_edges, "faces": len(cx.faces),
        "interior_vertices": len(interior), "check": "rivin" if args.rivin else "c1",
        "violations": ([{"vertex": cplx._json_id(cx.vertex_ids[v]), "deviation": s - 2 * math.pi} for v, s in bad]
                       if args.rivin else [{"face": b.face, "deviation": b.deviation} for b in bad]),
        "normalized_character_min": min(nc) if nc else None,
        "normalized_character_max": max(nc) if nc else None,
    }
    print(json.dumps(report, indent=2, sort_keys=True))
    return EXIT_OK if not bad else EXIT_UNCONVERGED


def _free_set(cx, cfg):
    if cfg["free_radius"] is None:
        return None
    root = _default_root(cx) if cfg["root"] is None else cfg["root"]
    try:
        ex = build_exhaustion(cx, root, [int(cfg["free_radius"])])
    except (cplx.VertexLookupError, KeyError):
        raise UsageError(f"unknown root vertex {root!r}") from None
    # frozen values stand in for the missing part of an open star
    return np.array(sorted(set(ex.levels[0]) & cx.interior_vertices), dtype=np.int64)


def _default_root(cx):
    """Vertex nearest the origin when positions are known, else the first one."""
    if cx.positions is None:
        return cx.vertex_ids[0]
    pos = np.asarray(cx.positions, dtype=float)
    return cx.vertex_ids[int(np.argmin(np.sum(pos[:, :2] ** 2, axis=1)))]


def _initial_metric(cx, cfg, bg, free):
    init = cfg["init"]
    if init == "character":
        if bg is not Background.HYPERBOLIC:
            raise UsageError("--init character needs --geometry hyperbolic")
        return initial_metric_hyperbolic_character(cx, float(cfg["c_hat"]), free)
    from . import geometry as geo
    base = float(geo.r_to_u(bg, float(cfg["r0"])))
    if init == "constant":
        u = np.full(cx.n_vertices, base)
    elif init == "perturb":
        u = initial_metric_perturbed(cx, bg, float(cfg["perturb"]), np.random.default_rng(int(cfg["seed"])),
                                     support=free, norm=cfg["perturb_norm"], base=base).u.copy()
    else:
        raise UsageError(f"unknown --init {init!r}")
    for v in cx.infinity_set:
        u[v] = np.nan
    return PackingMetric(bg, u)


def cmd_flow(args) -> int:
    started = _now()
    cfg = resolve(args, FLOW_DEFAULTS)
    cx = _load_complex(args.complex)
    if cfg["theta_const"] is not None:
        cx = cx.with_theta(np.full(cx.n_edges, parse_angle(cfg["theta_const"])))
    bg = Background.parse(cfg["geometry"])
    if cfg["k_hat"] == "from-infinity-marks":
        K_hat = prescribed_curvature_hat(cx)
    elif cfg["k_hat"] == "zero":
        K_hat = None
    else:
        raise UsageError(f"unknown --k-hat {cfg['k_hat']!r}")
    free = _free_set(cx, cfg)
    if free is None and cx.infinity_set:
        free = np.array(sorted(set(range(cx.n_vertices)) - cx.infinity_set), dtype=np.int64)
    metric0 = _initial_metric(cx, cfg, bg, free)
    config = FlowConfig(background=bg, K_hat=K_hat, integrator=cfg["integrator"], dt_init=float(cfg["dt"]),
                        t_max=float(cfg["t_max"]), tol_K=float(cfg["tol"]), step_tol=float(cfg["step_tol"]),
                        snapshot_every=int(cfg["snapshot_every"]))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        trace = integrate(cx, metric0, config, free=free)
    except IntegratorFailure as exc:
        print(f"error: integrator failed: {exc}", file=sys.stderr)
        trace = getattr(exc, "trace", None)
        if trace is None:
            return EXIT_UNCONVERGED
    outputs = {"trace_csv": str(out / "trace.csv"), "trace_npz": str(out / "trace.npz"),
               "metric": str(out / "metric.json"), "complex": str(out / "complex.json")}
    write_trace_csv(trace, outputs["trace_csv"], cx.vertex_ids)
    save_trace(trace, outputs["trace_npz"])
    _write_json(outputs["metric"], metric_to_json(cx, trace.metric()))
    cplx.dump(cx, outputs["complex"])
    extra = {"resolved": cfg, "threads": thread_count(), "started": started}
    if cfg["exhaustion"]:
        radii = [int(x) for x in str(cfg["exhaustion"]).split(",")]
        root = _default_root(cx) if cfg["root"] is None else cfg["root"]
        try:
            sweep = truncation_sweep(cx, build_exhaustion(cx, root, radii), metric0, config)
        except cplx.ComplexError as exc:
            raise UsageError(str(exc)) from None
        extra["exhaustion"] = {"radii": radii, "deltas": sweep.deltas,
                               "converged": [t.converged for t in sweep.traces]}
    extra["finished"] = _now()
    _write_json(out / "manifest.json", run_manifest("flow", config, cx, trace, outputs, extra))
    print(f"{trace.status}: residual {trace.residual[-1]:.3e} at t = {trace.t_final:.4g} "
          f"({len(trace) - 1} steps)")
    return EXIT_OK if trace.converged else EXIT_UNCONVERGED


def _load_run(run: Path):
    try:
        z = np.load(run / "trace.npz")
        manifest = json.loads((run / "manifest.json").read_text())
    except FileNotFoundError as exc:
        raise UsageError(f"{run} is not a flow output directory ({exc.filename} missing)") from None
    return z, manifest


def cmd_analyze(args) -> int:
    run = Path(args.run)
    z, manifest = _load_run(run)
    times, res, energy = z["times"], z["residual"], z["energy"]
    report = {"status": str(z["status"]), "final_residual": float(res[-1]), "t_final": float(times[-1]),
              "samples": int(len(times))}
    if len(times) >= 10:
        rate, rw = fit_exponential_rate(times, res)
        expo, pw = fit_power_law(times, energy)
        report.update({"rate": rate, "rate_window": rw, "power_exponent": expo, "power_window": pw,
                       "energy_times_1pt_max": float(np.max(energy * (1.0 + times)))})
    else:
        report["note"] = "fewer than 10 samples; no rates fitted"
    if "exhaustion" in manifest:
        report["exhaustion"] = manifest["exhaustion"]
    text = json.dumps(report, indent=2, sort_keys=True, default=float)
    if args.output:
        Path(args.output).write_text(text + "\n")
    print(text)
    return EXIT_OK if bool(z["converged"]) else EXIT_UNCONVERGED


def cmd_render(args) -> int:
    run = Path(args.run)
    cx = _load_complex(run / "complex.json")
    z, _ = _load_run(run)
    if not bool(z["converged"]) and not args.force:
        print("error: run did not converge; pass --force to render anyway", file=sys.stderr)
        return EXIT_UNCONVERGED
    metric = metric_from_json(json.loads((run / "metric.json").read_text()))
    free = z["free"]
    try:
        layout = lay.embed(cx, metric, free=free, check=not args.force)
    except lay.NonFlatMetricError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNCONVERGED
    heat = None
    if args.heat:
        heat = np.full(cx.n_vertices, np.nan)
        heat[free] = z["K_free"][-1]
    out = Path(args.output or run / "layout.svg")
    out.write_text(lay.render_svg(layout, triangulation=args.triangulation, heat=heat))
    _write_json(out.with_suffix(".json"), layout.to_json())
    if args.decay_plot:
        from .layout import render_decay_plot

        class _T:
            times, energy = z["times"], z["energy"]
        render_decay_plot(_T, args.decay_plot)
    print(f"wrote {out}")
    return EXIT_OK


def cmd_polyhedron(args) -> int:
    poly = _load_complex(args.complex)
    if args.theta is not None:
        poly = poly.with_theta(np.full(poly.n_edges, parse_angle(args.theta)))
    bad = cplx.validate_rivin_vertex_sums(poly)
    if bad:
        print(f"error: {len(bad)} vertices violate the 2*pi angle-sum condition", file=sys.stderr)
        return EXIT_USAGE
    pattern = lay.rivin_to_pattern(poly, args.infinity_face)
    free = np.array(sorted(set(range(pattern.n_vertices)) - pattern.infinity_set), dtype=np.int64)
    u0 = np.full(pattern.n_vertices, np.nan)
    u0[free] = 0.0
    config = FlowConfig(Background.EUCLIDEAN, prescribed_curvature_hat(pattern), tol_K=args.tol)
    trace = integrate(pattern, PackingMetric(Background.EUCLIDEAN, u0), config, free=free)
    if not trace.converged:
        print(f"error: flow did not converge ({trace.status})", file=sys.stderr)
        return EXIT_UNCONVERGED
    layout = lay.embed(pattern, trace.metric(), free=free)
    data = lay.polyhedron_from_pattern(lay.stereographic_project(layout))
    doc = data.to_json()
    doc["max_dihedral_error"] = float(np.max(np.abs(data.dihedral - data.target))) if len(data.dihedral) else 0.0
    _write_json(args.output, doc)
    print(f"{len(doc['planes'])} faces, {len(data.ideal_vertices)} ideal vertices, "
          f"max dihedral error {doc['max_dihedral_error']:.2e}")
    return EXIT_OK


# ----------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="circleflow", description="Ideal circle patterns by combinatorial Ricci flow.")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a fixture complex as JSON")
    g.add_argument("name", help=f"one of {', '.join(sorted(gen.GENERATORS))}")
    g.add_argument("--radius", type=int)
    g.add_argument("--depth", type=int)
    g.add_argument("--p", type=int)
    g.add_argument("--q", type=int)
    g.add_argument("--n", type=int)
    g.add_argument("--center")
    g.add_argument("--max-faces", dest="max_faces", type=int)
    g.add_argument("--theta", help="constant edge angle (radians, 'pi/2' style accepted)")
    g.add_argument("--infinity-face", dest="infinity_face", type=int, help="mark this face as the face at infinity")
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_generate)

    v = sub.add_parser("validate", help="check face (or vertex) angle conditions")
    v.add_argument("complex")
    v.add_argument("--rivin", action="store_true", help="check vertex sums of 2*pi instead of face sums")
    v.add_argument("--tol", type=float, default=cplx.TAU_C1)
    v.set_defaults(func=cmd_validate)

    f = sub.add_parser("flow", help="integrate the Ricci flow")
    f.add_argument("complex")
    f.add_argument("--out", required=True, help="output directory")
    f.add_argument("--config", help="JSON file of defaults (flags take precedence)")
    f.add_argument("--geometry", choices=["euclidean", "hyperbolic"])
    f.add_argument("--theta-const", dest="theta_const")
    f.add_argument("--init", choices=["constant", "perturb", "character"])
    f.add_argument("--r0", type=float, help="constant initial radius")
    f.add_argument("--perturb", type=float, help="size of the random perturbation (implies --init perturb)")
    f.add_argument("--perturb-norm", dest="perturb_norm", choices=["l2", "linf"])
    f.add_argument("--seed", type=int)
    f.add_argument("--c-hat", dest="c_hat", type=float)
    f.add_argument("--k-hat", dest="k_hat", choices=["zero", "from-infinity-marks"])
    f.add_argument("--integrator", choices=["rk45", "rk4"])
    f.add_argument("--dt", type=float)
    f.add_argument("--t-max", dest="t_max", type=float)
    f.add_argument("--tol", type=float)
    f.add_argument("--step-tol", dest="step_tol", type=float)
    f.add_argument("--root", type=int)
    f.add_argument("--free-radius", dest="free_radius", type=int, help="free vertices: hop ball around --root")
    f.add_argument("--exhaustion", help="comma-separated hop radii for a truncation sweep")
    f.add_argument("--snapshot-every", dest="snapshot_every", type=int)
    f.set_defaults(func=cmd_flow)

    a = sub.add_parser("analyze", help="fit decay rates of a flow run")
    a.add_argument("run")
    a.add_argument("-o", "--output")
    a.set_defaults(func=cmd_analyze)

    r = sub.add_parser("render", help="draw the final pattern of a flow run as SVG")
    r.add_argument("run")
    r.add_argument("-o", "--output")
    r.add_argument("--triangulation", action="store_true")
    r.add_argument("--heat", action="store_true", help="fill circles by final curvature")
    r.add_argument("--decay-plot", dest="decay_plot", help="also write an energy decay plot")
    r.add_argument("--force", action="store_true")
    r.set_defaults(func=cmd_render)

    p = sub.add_parser("polyhedron", help="ideal polyhedron from combinatorics and exterior dihedral angles")
    p.add_argument("complex")
    p.add_argument("--theta", help="constant exterior dihedral angle")
    p.add_argument("--infinity-face", dest="infinity_face", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_polyhedron)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if getattr(args, "perturb", None) is not None and getattr(args, "init", None) is None:
        args.init = "perturb"
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (PreconditionError, DomainError, cplx.ComplexError, InsufficientData, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
