"""Numbered verification suites: every acceptance property in one runner.

Each suite returns {"name", "passed", "residual", "tolerance", ...}; the
CLI verb verify-all and the acceptance tests share this module, so there
is exactly one definition of every check and tolerance.
"""
from __future__ import annotations

import numpy as np

from .catenoid_field import (
    FieldConfig,
    build_field_data,
    catenoid_closed_form,
    catenoid_reference,
    embedding_probe,
    lambda_reference_integral,
    mesh_fundamental_domain,
    replicate,
    translation_periods,
    verify_square_torus,
)
from .elliptic import build_symmetric_wp, c_formula_route, count_degree
from .gammafn import (
    algebraic_equation_residual,
    build_gamma,
    gamma_sq_identity_residual,
    measure_c0,
    rescale_lattice_for_unit_c0,
)
from .lattice import Lattice
from .mesh import concatenate
from .minrep import (
    PathSpec,
    conformality_residual,
    integrate,
    line_type,
    period_vector,
    total_curvature,
)
from .mobius import MobiusMap, induced_involution, shape_involutions, standard_involution

TEST_TORI = {
    "square": (1.0 + 0j, 1j),
    "rectangular": (1.0 + 0j, 2j),
    "rhombic": (np.exp(1j * np.pi / 6), -np.exp(-1j * np.pi / 6)),
}


def _samples(lattice: Lattice, n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return lattice.from_coords(rng.uniform(0.02, 0.98, n), rng.uniform(0.02, 0.98, n))


def suite_symmetric_normalization(seed: int = 0) -> dict:
    worst = 0.0
    for name, (w1, w2) in TEST_TORI.items():
        wp = build_symmetric_wp(Lattice(w1, w2))
        hs = wp.lattice.w1 + wp.lattice.w2
        hd = wp.lattice.w1 - wp.lattice.w2
        errs = [
            abs(wp.wp(0j)),
            abs(wp.wp(hs / 2) - 1j),
            abs(wp.wp(-hs / 2) - 1j),
            abs(wp.wp(hd / 2) + 1j),
            abs(wp.wp(-hd / 2) + 1j),
        ]
        worst = max(worst, max(errs))
    return {"name": "symmetric_normalization", "residual": worst,
            "tolerance": 1e-8, "passed": worst <= 1e-8}


def suite_eq3_identity(seed: int = 1) -> dict:
    worst = 0.0
    for name, (w1, w2) in TEST_TORI.items():
        wp = build_symmetric_wp(Lattice(w1, w2))
        lat = wp.lattice
        z = _samples(lat, 1000, seed)
        prod = np.asarray(wp.wp(-z + lat.w1 + lat.w2)) * np.asarray(wp.wp(z))
        rel = np.abs(prod + 1.0) / np.abs(prod)
        worst = max(worst, float(np.nanmax(rel)))
    return {"name": "eq3_identity", "residual": worst,
            "tolerance": 1e-7, "passed": worst <= 1e-7}


def suite_eq4_residual(seed: int = 2) -> dict:
    worst_res = 0.0
    worst_routes = 0.0
    for name, (w1, w2) in TEST_TORI.items():
        wp = build_symmetric_wp(Lattice(w1, w2))
        z = _samples(wp.lattice, 100, seed)
        v, vp = wp.wp_with_prime(z)
        res = np.abs(vp**2 - wp.c * v * (v - wp.x) * (v + 1.0 / wp.x)) / (1.0 + np.abs(vp) ** 2)
        worst_res = max(worst_res, float(np.nanmax(res)))
        routes = abs(c_formula_route(wp) - wp.c) / abs(wp.c)
        worst_routes = max(worst_routes, float(routes))
    passed = worst_res <= 1e-8 and worst_routes <= 1e-6
    return {"name": "eq4_residual", "residual": worst_res, "tolerance": 1e-8,
            "c_routes_rel_diff": worst_routes, "c_routes_tolerance": 1e-6,
            "passed": passed}


def _expected_induced(kind: str, shape_tag: str, x: complex):
    """Printed sphere-involution formulas for the standard torus involutions."""
    if kind == "H":
        return MobiusMap(0, -1, 1, 0)
    if shape_tag in ("rectangular", "square"):
        ta = float(x.real)
        return {
            "I1": MobiusMap(1, 0, 0, 1, conjugate_first=True),
            "I2": MobiusMap(1, 0, 0, 1, conjugate_first=True),
            "I3": MobiusMap(ta, 1, 1, -ta, conjugate_first=True),
            "I4": MobiusMap(-1, ta, ta, 1, conjugate_first=True),
        }[kind]
    return {
        "I1": MobiusMap(-1, 0, 0, 1, conjugate_first=True),
        "I2": MobiusMap(-1, 0, 0, 1, conjugate_first=True),
        "I5": MobiusMap(0, 1, 1, 0, conjugate_first=True),
        "I6": MobiusMap(0, 1, 1, 0, conjugate_first=True),
    }[kind]


def _coeff_distance(got: MobiusMap, want: MobiusMap) -> float:
    if got.conjugate_first != want.conjugate_first:
        return np.inf
    a = got.normalized().matrix
    b = want.normalized().matrix
    return float(min(np.max(np.abs(a - b)), np.max(np.abs(a + b))))


def suite_induced_involutions(seed: int = 3) -> dict:
    rng = np.random.default_rng(seed)
    worst = 0.0
    rows = []
    for name, (w1, w2) in TEST_TORI.items():
        wp = build_symmetric_wp(Lattice(w1, w2))
        lat = wp.lattice
        probes = lat.from_coords(rng.uniform(0.05, 0.95, 100), rng.uniform(0.05, 0.95, 100))
        for kind in shape_involutions(lat, wp.shape.tag):
            if kind == "neg":
                continue  # induces the identity; nothing to fit
            inv = standard_involution(kind, lat)
            fitted = induced_involution(inv, wp.wp, probes, tol=1e-8)
            want = _expected_induced(kind, wp.shape.tag, wp.x)
            d = _coeff_distance(fitted, want)
            worst = max(worst, d)
            rows.append({"torus": name, "kind": kind, "coeff_err": d})
    return {"name": "induced_involutions", "residual": worst, "tolerance": 1e-7,
            "passed": worst <= 1e-7, "rows": rows}


def suite_gamma(seed: int = 4) -> dict:
    details = {}
    worst = 0.0
    for name in ("square", "rectangular"):
        w1, w2 = TEST_TORI[name]
        g = build_gamma(build_symmetric_wp(Lattice(w1, w2)))
        exact_angle = abs(g.alpha + g.theta - np.pi / 2)
        lat = g.lattice
        e = np.exp(1j * g.theta)
        vals = max(
            abs(g.gamma(0j) - e),
            abs(g.gamma(lat.w1) + np.conj(e)),
            abs(g.gamma(lat.w2) - np.conj(e)),
            abs(g.gamma(lat.w1 / 2) - 1j),
            abs(g.gamma(lat.w2 / 2) - 1.0),
        )
        g1 = rescale_lattice_for_unit_c0(g)
        eq = algebraic_equation_residual(g1)
        ident = gamma_sq_identity_residual(g1)
        c0 = measure_c0(g1)
        details[name] = {"angle_sum_err": exact_angle, "special_values": vals,
                         "equation_residual": eq, "identity_residual": ident,
                         "c0_after_rescale": abs(c0 - 1.0)}
        worst = max(worst, exact_angle, vals, eq, ident)
    return {"name": "gamma_suite", "residual": worst, "tolerance": 1e-8,
            "passed": worst <= 1e-8, "details": details}


def suite_catenoid_oracle(seed: int = 5) -> dict:
    data = catenoid_reference(paper_scale=True)
    rng = np.random.default_rng(seed)
    worst = 0.0
    base = catenoid_closed_form(np.array(1.0 + 0j), paper_scale=True)
    for _ in range(100):
        r = float(np.exp(rng.uniform(np.log(0.25), np.log(4.0))))
        phi = float(rng.uniform(0, 2 * np.pi))
        p = r * np.exp(1j * phi)
        route = PathSpec(segments=(("line", 1 + 0j, r + 0j), ("arc", 0j, r, 0.0, phi)))
        val, _ = integrate(data, route, tol=1e-9)
        err = np.max(np.abs(base + val.real - catenoid_closed_form(np.array(p), paper_scale=True)))
        worst = max(worst, float(err))
    return {"name": "catenoid_oracle", "residual": worst, "tolerance": 1e-6,
            "passed": worst <= 1e-6}


def suite_conformality(field=None, seed: int = 6) -> dict:
    if field is None:
        field = build_field_data(FieldConfig())
    z = _samples(field.lattice, 400, seed)
    res_field = float(np.max(conformality_residual(field.weierstrass, z)))
    rng = np.random.default_rng(seed + 1)
    zc = np.exp(rng.uniform(np.log(0.2), np.log(5.0), 300)
                + 1j * rng.uniform(0, 2 * np.pi, 300))
    res_cat = float(np.max(conformality_residual(catenoid_reference(), zc)))
    worst = max(res_field, res_cat)
    return {"name": "conformality", "residual": worst, "tolerance": 1e-12,
            "passed": worst <= 1e-12}


def suite_period_problem(field=None) -> dict:
    if field is None:
        field = build_field_data(FieldConfig())
    tp = translation_periods(field)
    lam = tp["lambda"]
    v1, v2 = tp["vectors"]
    checks = tp["checks"]
    end = {}
    worst_end = 0.0
    for label in ("TC", "BC"):
        pv = period_vector(field.weierstrass,
                           PathSpec.circle(field.points[label], 0.15 * field.L),
                           tol=field.config.quad_tol)
        end[label] = pv.magnitude / lam
        worst_end = max(worst_end, pv.magnitude / lam)
    ref = lambda_reference_integral(field.config.c)
    one_d = abs(lam - ref) / ref
    resid = max(worst_end, checks["magnitude_rel_diff"], checks["v1_vs_lam_sqrt2"],
                checks["orthogonality"], checks["vertical_component"], one_d)
    return {"name": "period_problem", "residual": float(resid), "tolerance": 1e-6,
            "passed": resid <= 1e-6, "lambda": lam, "one_d_rel_diff": one_d,
            "end_closure": end, "checks": {k: float(v) for k, v in checks.items()},
            "vectors": [list(map(float, v1.p)), list(map(float, v2.p))]}


def suite_total_curvature(field=None, n: int = 128, end_cutoff: float = 50.0) -> dict:
    if field is None:
        field = build_field_data(FieldConfig())
    tc = total_curvature(field.weierstrass, n=n, end_cutoff=end_cutoff)
    target = -8.0 * np.pi
    rel = abs(tc - target) / abs(target)
    return {"name": "total_curvature", "residual": float(rel), "tolerance": 0.02,
            "passed": rel <= 0.02, "value": float(tc), "target": float(target)}


def suite_symmetry_lines(field=None, mesh=None) -> dict:
    if field is None:
        field = build_field_data(FieldConfig())
    if mesh is None:
        mesh = mesh_fundamental_domain(field)
    data = field.weierstrass
    L = field.L
    A, E = field.points["A"], field.points["E"]
    beta = PathSpec.polyline([A, E])
    rho = PathSpec.polyline([0.12j * L * (field.dir_A / 1j), 0.95 * A])
    beta_type = line_type(data, beta)
    rho_type = line_type(data, rho)

    # geometric residuals from the meshed boundary curves
    pts_beta = mesh.vertices[mesh.vertex_tags["nu3"]]
    ctr = pts_beta.mean(axis=0)
    q = pts_beta - ctr
    _, _, vt = np.linalg.svd(q, full_matrices=False)
    resid_line = float(np.max(np.linalg.norm(q - np.outer(q @ vt[0], vt[0]), axis=1)))
    ext_beta = float(np.max(np.linalg.norm(q, axis=1)) * 2)

    pts_rho = mesh.vertices[mesh.vertex_tags["nu1"]]
    ctr2 = pts_rho.mean(axis=0)
    q2 = pts_rho - ctr2
    _, _, vt2 = np.linalg.svd(q2, full_matrices=False)
    resid_plane = float(np.max(np.abs(q2 @ vt2[-1])))
    ext_rho = float(np.max(np.linalg.norm(q2, axis=1)) * 2)

    res = max(resid_line / ext_beta, resid_plane / ext_rho)
    passed = (beta_type == "asymptotic" and rho_type == "principal" and res <= 1e-6)
    return {"name": "symmetry_lines", "residual": float(res), "tolerance": 1e-6,
            "passed": passed, "beta_type": beta_type, "rho_type": rho_type,
            "collinearity": resid_line / ext_beta, "planarity": resid_plane / ext_rho}


def suite_embedding(field=None, mesh=None, negative_control: bool = True) -> dict:
    if field is None:
        field = build_field_data(FieldConfig(mesh_nu=20, mesh_nv=20, copies=(1, 1)))
    if mesh is None:
        mesh = mesh_fundamental_domain(field)
    tp = translation_periods(field)
    lam = tp["lambda"]
    from dataclasses import replace as _dc_replace
    single = replicate(build_field_data(_dc_replace(field.config, copies=(0, 0)),
                                        gamma=field.gamma), mesh)
    probe_single = embedding_probe(single, exclusion_radius=0.05 * lam)
    block = replicate(field, mesh)
    probe = embedding_probe(block, exclusion_radius=0.05 * lam)
    control_hits = None
    if negative_control:
        from .intersect import self_intersections
        shifted = block.translated(0.5 * tp["vectors"][0].p)
        both = concatenate([block, shifted])
        control = self_intersections(both, exclusion_radius=0.0,
                                     cross_split=block.n_faces)
        control_hits = len(control)
    passed = (probe["clean"] and probe_single["clean"]
              and (control_hits is None or control_hits > 0))
    return {"name": "embedding_probe",
            "residual": float(len(probe["intersections"]) + len(probe_single["intersections"])),
            "tolerance": 0.0, "passed": bool(passed),
            "intersections": len(probe["intersections"]),
            "fundamental_piece_intersections": len(probe_single["intersections"]),
            "negative_control_intersections": control_hits,
            "n_faces": probe["n_faces"]}


def suite_degree_counts(field=None, seed: int = 7) -> dict:
    wp = build_symmetric_wp(Lattice(1.0, 1j))
    lat = wp.lattice
    if field is None:
        field = build_field_data(FieldConfig())
    ok = True
    rows = []
    for k in range(5):
        v = 0.55 * np.exp(1j * (0.4 + 1.25 * k)) + 0.3 - 0.2j
        n1 = count_degree(wp.wp, v, lat, f_prime=wp.wp_prime)
        n2 = count_degree(wp.wp_prime, v, lat)
        n3 = count_degree(field.weierstrass.g_fn, v * field.config.c, field.lattice,
                          f_prime=field.weierstrass.g_prime_fn)
        rows.append({"value": str(v), "wp": n1, "wp_prime": n2, "g": n3})
        ok = ok and n1 == 2 and n2 == 3 and n3 == 2
    return {"name": "degree_counts", "residual": 0.0 if ok else 1.0,
            "tolerance": 0.0, "passed": ok, "rows": rows}


def run_all(mesh_nu: int = 20, mesh_nv: int = 20, progress=None) -> dict:
    """Run every acceptance suite; returns the full report."""
    field = build_field_data(FieldConfig(mesh_nu=mesh_nu, mesh_nv=mesh_nv, copies=(1, 1)))
    mesh = mesh_fundamental_domain(field)
    square = verify_square_torus(field.gamma)
    suites = []
    steps = [
        lambda: suite_symmetric_normalization(),
        lambda: suite_eq3_identity(),
        lambda: suite_eq4_residual(),
        lambda: suite_induced_involutions(),
        lambda: suite_gamma(),
        lambda: suite_catenoid_oracle(),
        lambda: suite_conformality(field),
        lambda: suite_period_problem(field),
        lambda: suite_total_curvature(field),
        lambda: suite_symmetry_lines(field, mesh),
        lambda: suite_embedding(field, mesh),
        lambda: suite_degree_counts(field),
    ]
    for step in steps:
        rec = step()
        suites.append(rec)
        if progress is not None:
            progress(rec)
    return {
        "report_type": "verify-all",
        "square_torus": square,
        "suites": suites,
        "passed": all(s["passed"] for s in suites),
    }
