"""Command-line surface.

Subcommands: wp, gamma, involutions, torus, periods, catenoid, mesh,
verify-all.  Exit codes: 0 success, 2 validation error, 3 numerical
acceptance failure, 4 file write failure.  Output is deterministic for a
fixed config and seed.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .catenoid_field import (
    build_field_data,
    embedding_probe,
    mesh_fundamental_domain,
    replicate,
    translation_periods,
    verify_square_torus,
)
from .config import ConfigError, RunConfig, complex_json, load_config, parse_complex
from .elliptic import build_symmetric_wp, half_period_values
from .errors import EllipticaError
from .gammafn import (
    algebraic_equation_residual,
    build_gamma,
    gamma_sq_identity_residual,
    measure_c0,
)
from .mesh import write_obj, write_ply
from .minrep import PathSpec, period_vector
from .mobius import fixed_points, induced_involution, shape_involutions, standard_involution

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_ACCEPTANCE = 3
EXIT_WRITE = 4


def _write_text(path: str, text: str):
    try:
        with open(path, "w") as fh:
            fh.write(text)
    except OSError as exc:
        raise _WriteError(f"cannot write {path!r}: {exc}") from exc


class _WriteError(Exception):
    pass


def _sanitize(obj):
    """Coerce numpy scalars/arrays so json.dumps accepts the report."""
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return [_sanitize(v) for v in obj.tolist()]
    return obj


def _dump_report(report: dict, path: str | None):
    text = json.dumps(_sanitize(report), indent=2, sort_keys=True)
    if path:
        _write_text(path, text + "\n")
    else:
        print(text)


def _sample_grid(lattice, n: int):
    s = (np.arange(n) + 0.5) / n
    S, T = np.meshgrid(s, s, indexing="ij")
    return lattice.from_coords(S.ravel(), T.ravel())


def _csv_dump(path: str, z, f, fp, name: str):
    lines = [f"re(z),im(z),re({name}),im({name}),re({name}_prime),im({name}_prime)"]
    for zz, vv, pp in zip(z, f, fp):
        lines.append("%.17g,%.17g,%.17g,%.17g,%.17g,%.17g"
                     % (zz.real, zz.imag, vv.real, vv.imag, pp.real, pp.imag))
    _write_text(path, "\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# verbs
# ---------------------------------------------------------------------------

def cmd_torus(args, cfg: RunConfig) -> int:
    wp = build_symmetric_wp(cfg.lattice, policy=cfg.truncation)
    rec = half_period_values(wp)
    report = {
        "report_type": "torus",
        "shape": wp.shape.tag,
        "alpha": rec["alpha"],
        "rho": rec["rho"],
        "x": complex_json(wp.x),
        "c": complex_json(wp.c),
        "a": complex_json(wp.a),
        "b": complex_json(wp.b),
        "wp_w2": complex_json(rec["wp_w2"]),
    }
    _dump_report(report, args.json)
    return EXIT_OK


def cmd_wp(args, cfg: RunConfig) -> int:
    wp = build_symmetric_wp(cfg.lattice, policy=cfg.truncation)
    zs = [parse_complex(z) for z in args.z] if args.z else []
    values = []
    for z in zs:
        v, vp = wp.wp_with_prime(np.array([z]))
        values.append({"z": complex_json(z), "wp": complex_json(complex(v[0])),
                       "wp_prime": complex_json(complex(vp[0]))})
        print(f"wp({z}) = {complex(v[0])}    wp'({z}) = {complex(vp[0])}")
    csv_path = None
    if args.csv:
        grid = _sample_grid(cfg.lattice, args.grid)
        v, vp = wp.wp_with_prime(grid)
        _csv_dump(args.csv, grid, v, vp, "wp")
        csv_path = args.csv
    if args.figures:
        from .figures import save_wp_figure
        fig_path = (args.csv or args.json or "wp") + ".png"
        save_wp_figure(wp, fig_path)
        print(f"figure written to {fig_path}")
    report = {"report_type": "wp", "values": values, "csv": csv_path}
    if args.json:
        _dump_report(report, args.json)
    return EXIT_OK


def cmd_gamma(args, cfg: RunConfig) -> int:
    g = build_gamma(build_symmetric_wp(cfg.lattice, policy=cfg.truncation))
    zs = [parse_complex(z) for z in args.z] if args.z else []
    values = []
    for z in zs:
        v = complex(np.atleast_1d(g.gamma(z))[0])
        vp = complex(np.atleast_1d(g.gamma_prime(z))[0])
        values.append({"z": complex_json(z), "gamma": complex_json(v),
                       "gamma_prime": complex_json(vp)})
        print(f"gamma({z}) = {v}    gamma'({z}) = {vp}")
    c0 = measure_c0(g)
    eq_res = algebraic_equation_residual(g, c0=c0)
    id_res = gamma_sq_identity_residual(g)
    print(f"alpha = {g.alpha:.12g}  theta = {g.theta:.12g}  c0 = {c0:.12g}")
    print(f"algebraic-equation residual (measured c0): {eq_res:.3g}")
    print(f"squared-gamma identity residual: {id_res:.3g}")
    csv_path = None
    if args.csv:
        grid = _sample_grid(cfg.lattice, args.grid)
        v, vp = g.gamma_with_prime(grid)
        _csv_dump(args.csv, grid, np.asarray(v), np.asarray(vp), "gamma")
        csv_path = args.csv
    if args.figures:
        from .figures import save_gamma_figure
        fig_path = (args.csv or args.json or "gamma") + ".png"
        save_gamma_figure(g, fig_path)
        print(f"figure written to {fig_path}")
    report = {"report_type": "gamma", "alpha": g.alpha, "theta": g.theta,
              "c0": complex_json(c0), "equation_residual": eq_res,
              "identity_residual": id_res, "values": values, "csv": csv_path}
    if args.json:
        _dump_report(report, args.json)
    return EXIT_OK


def cmd_involutions(args, cfg: RunConfig) -> int:
    wp = build_symmetric_wp(cfg.lattice, policy=cfg.truncation)
    lat = wp.lattice
    rng = np.random.default_rng(cfg.seed)
    probes = lat.from_coords(rng.uniform(0.05, 0.95, 24), rng.uniform(0.05, 0.95, 24))
    rows = []
    print(f"{'kind':<6} {'anti':<5} {'coefficients (a,b;c,d normalized)':<58} residual")
    for kind in shape_involutions(lat, wp.shape.tag):
        inv = standard_involution(kind, lat)
        if kind == "neg":
            coeffs = [1 + 0j, 0j, 0j, 1 + 0j]
            resid = 0.0
            anti = False
        else:
            fitted = induced_involution(inv, wp.wp, probes)
            m = fitted.normalized()
            coeffs = [m.a, m.b, m.c, m.d]
            pred = np.asarray(fitted(np.asarray(wp.wp(probes))))
            target = np.asarray(wp.wp(inv(probes)))
            ok = np.isfinite(pred) & np.isfinite(target)
            resid = float(np.max(np.abs(pred[ok] - target[ok])
                                 / np.sqrt((1 + np.abs(pred[ok]) ** 2) * (1 + np.abs(target[ok]) ** 2))))
            anti = fitted.conjugate_first
        fp = fixed_points(inv, lat)
        fp_json = ([complex_json(p.z) for p in fp] if kind in ("neg", "H")
                   else [{"base": complex_json(d["base"]), "direction": complex_json(d["direction"])}
                         for d in fp])
        coeff_str = " ".join(f"{c:.6g}" for c in coeffs)
        print(f"{kind:<6} {str(anti):<5} {coeff_str:<58} {resid:.3g}")
        rows.append({"kind": kind, "anti": bool(anti),
                     "coefficients": [complex_json(c) for c in coeffs],
                     "certification_residual": resid,
                     "fixed_points": fp_json})
    report = {"report_type": "involutions", "shape": wp.shape.tag, "involutions": rows}
    if args.json:
        _dump_report(report, args.json)
    return EXIT_OK


def _load_loop(path: str, cfg: RunConfig) -> PathSpec:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read loop spec {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"malformed loop JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}",
            line=exc.lineno, column=exc.colno) from exc
    if "circle" in raw:
        c = raw["circle"]
        center = complex(float(c["center"]["re"]), float(c["center"]["im"]))
        return PathSpec.circle(center, float(c["radius"]))
    if "waypoints" not in raw:
        raise ConfigError("loop spec needs 'waypoints' or 'circle'")
    pts = [complex(float(p["re"]), float(p["im"])) for p in raw["waypoints"]]
    return PathSpec.polyline(pts, closed=bool(raw.get("closed", True)))


def cmd_periods(args, cfg: RunConfig) -> int:
    field = build_field_data(cfg.field_config())
    loop = _load_loop(args.loop, cfg)
    pv = period_vector(field.weierstrass, loop, tol=cfg.quad_tol)
    print(f"period vector: [{pv.p[0]:.12g}, {pv.p[1]:.12g}, {pv.p[2]:.12g}]")
    print(f"quadrature error estimate: {pv.error:.3g}")
    if args.figures:
        from .figures import save_loop_figure
        fig_path = (args.json or "periods") + ".png"
        save_loop_figure(loop, field.lattice, fig_path)
        print(f"figure written to {fig_path}")
    report = {"report_type": "periods",
              "period_vector": [float(x) for x in pv.p],
              "error_estimate": pv.error,
              "closed": bool(loop.closed)}
    if args.json:
        _dump_report(report, args.json)
    return EXIT_OK


def _field_report(field, mesh, block, tp, probe, square, out, ply) -> dict:
    v1, v2 = tp["vectors"]
    return {
        "report_type": "catenoid",
        "lambda": float(tp["lambda"]),
        "period_vectors": [[float(x) for x in v1.p], [float(x) for x in v2.p]],
        "end_closure_residuals": {
            label: float(period_vector(field.weierstrass,
                                       PathSpec.circle(field.points[label], 0.15 * field.L),
                                       tol=field.config.quad_tol).magnitude)
            for label in ("TC", "BC")
        },
        "intersections": probe["intersections"],
        "square_torus": square,
        "mesh_file": out,
        "ply_file": ply,
        "n_vertices": int(block.n_vertices),
        "n_faces": int(block.n_faces),
    }


def cmd_catenoid(args, cfg: RunConfig) -> int:
    field = build_field_data(cfg.field_config())
    square = verify_square_torus(field.gamma)
    mesh = mesh_fundamental_domain(field)
    block = replicate(field, mesh)
    tp = translation_periods(field)
    probe = embedding_probe(block, exclusion_radius=0.05 * tp["lambda"])
    if args.out:
        write_obj(block, args.out)
        print(f"OBJ written to {args.out} ({block.n_vertices} vertices, {block.n_faces} faces)")
    if args.ply:
        write_ply(block, args.ply)
        print(f"PLY written to {args.ply}")
    if args.figures:
        from .figures import save_mesh_figure
        fig_path = (args.out or args.report or "catenoid") + ".png"
        save_mesh_figure(block, fig_path)
        print(f"figure written to {fig_path}")
    report = _field_report(field, mesh, block, tp, probe, square, args.out, args.ply)
    _dump_report(report, args.report)
    ok = square["passed"] and probe["clean"]
    print(f"lambda = {tp['lambda']:.12g}; embedding probe "
          f"{'clean' if probe['clean'] else 'found intersections'}")
    return EXIT_OK if ok else EXIT_ACCEPTANCE


def cmd_mesh(args, cfg: RunConfig) -> int:
    field = build_field_data(cfg.field_config())
    mesh = mesh_fundamental_domain(field)
    if args.out:
        write_obj(mesh, args.out)
        print(f"OBJ written to {args.out} ({mesh.n_vertices} vertices, {mesh.n_faces} faces)")
    if args.ply:
        write_ply(mesh, args.ply)
        print(f"PLY written to {args.ply}")
    if args.figures:
        from .figures import save_mesh_figure
        fig_path = (args.out or "mesh") + ".png"
        save_mesh_figure(mesh, fig_path)
        print(f"figure written to {fig_path}")
    report = {"report_type": "mesh", "n_vertices": int(mesh.n_vertices),
              "n_faces": int(mesh.n_faces), "mesh_file": args.out, "ply_file": args.ply}
    if args.json:
        _dump_report(report, args.json)
    return EXIT_OK


def cmd_verify_all(args, cfg: RunConfig) -> int:
    from .verification import run_all

    def progress(rec):
        status = "pass" if rec["passed"] else "FAIL"
        print(f"[{status}] {rec['name']:<26} residual {rec['residual']:.3e} "
              f"(tolerance {rec['tolerance']:.0e})")

    report = run_all(mesh_nu=cfg.mesh_nu, mesh_nv=cfg.mesh_nv, progress=progress)
    _dump_report(report, args.json)
    if not report["passed"]:
        return EXIT_ACCEPTANCE
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="elliptica",
        description="Symmetric Weierstrass functions, torus involutions and "
                    "the doubly periodic field of catenoids.",
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, csv=False, mesh_out=False):
        sp.add_argument("--config", help="JSON run configuration")
        sp.add_argument("--json", help="write the JSON report here")
        sp.add_argument("--figures", action="store_true",
                        help="render matplotlib figures next to the outputs")
        if csv:
            sp.add_argument("--z", action="append",
                            help="evaluation point like '0.5+0.5i' (repeatable)")
            sp.add_argument("--csv", help="dump a sampled-grid CSV here")
            sp.add_argument("--grid", type=int, default=32, help="CSV grid resolution")
        if mesh_out:
            sp.add_argument("--out", help="OBJ output path")
            sp.add_argument("--ply", help="binary PLY output path")

    common(sub.add_parser("torus", help="classify the torus and print its constants"))
    common(sub.add_parser("wp", help="evaluate the symmetric wp"), csv=True)
    common(sub.add_parser("gamma", help="evaluate gamma and its residuals"), csv=True)
    common(sub.add_parser("involutions", help="certify the standard involutions"))
    sp = sub.add_parser("periods", help="integrate the forms around a loop")
    common(sp)
    sp.add_argument("--loop", required=True, help="JSON loop spec (waypoints or circle)")
    sp = sub.add_parser("catenoid", help="build, verify and export the field of catenoids")
    common(sp, mesh_out=True)
    sp.add_argument("--report", help="write the JSON report here (default: stdout)")
    common(sub.add_parser("mesh", help="mesh the fundamental domain only"), mesh_out=True)
    common(sub.add_parser("verify-all", help="run every verification suite"))
    return p


_DISPATCH = {
    "torus": cmd_torus,
    "wp": cmd_wp,
    "gamma": cmd_gamma,
    "involutions": cmd_involutions,
    "periods": cmd_periods,
    "catenoid": cmd_catenoid,
    "mesh": cmd_mesh,
    "verify-all": cmd_verify_all,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        return _DISPATCH[args.command](args, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (_WriteError, OSError) as exc:
        print(f"write error: {exc}", file=sys.stderr)
        return EXIT_WRITE
    except EllipticaError as exc:
        print(f"numerical acceptance failure: {exc}", file=sys.stderr)
        return EXIT_ACCEPTANCE


if __name__ == "__main__":
    sys.exit(main())
