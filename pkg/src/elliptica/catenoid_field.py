"""Doubly periodic field of catenoids on the square torus.

The evaluation chart puts the top catenoidal end TC at the origin (half a
diagonal period away from the chart in which gamma is normalized), so that

    TC = [0]         g = 0, dh pole      (end, opens upward)
    BC = [w1 + w2]   g = 0, dh pole      (end, opens downward)
    A  = [i L]       g = inf, dh zero    (regular; meets the straight lines)
    B  = [L]         g = inf, dh zero

with L the half period of the c0 = 1 square lattice.  The Gauss map is
g = c e^{i pi/4} gamma_hat and the height differential has chart
coefficient 1/gamma_hat, so the forms have closed expressions in
gamma_hat alone and stay finite at A and B.

The fundamental region R is the flat triangle TC-A-E (one sixteenth of
the torus), E being the midpoint of the straight A-B diagonal.  Its three
boundary curves have certified gamma images:

    nu1  TC -> A   vertical ray,        gamma_hat = -i t,          t in [0, inf]
    nu2  TC -> E   anti-diagonal ray,   gamma_hat = e^{-i pi/4} t, t in [0, 1]
    nu3  A  -> E   straight beta edge,  gamma_hat = e^{-i pi/4} t, t in [1, inf]

The mesh of R under X is replicated by Schwarz reflection across its
boundary curves (plane reflections for the planar geodesics, half-turns
about the straight lines), welded into the quotient-torus piece, and
translated by the two horizontal period vectors.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .elliptic import build_symmetric_wp, count_degree
from .errors import (
    ConstructionError,
    PeriodProblemError,
    SymmetryViolationError,
)
from .gammafn import GammaFn, build_gamma, rescale_lattice_for_unit_c0
from .lattice import Lattice, TorusPoint, reduce as reduce_z
from .mesh import SurfaceMesh, concatenate
from .minrep import (
    PathSpec,
    PeriodVector,
    WeierstrassData,
    adaptive_quadrature,
    integrate,
    period_vector,
)

SQRT2 = float(np.sqrt(2.0))


@dataclass(frozen=True)
class FieldConfig:
    """Build parameters for the catenoid field."""

    c: float = 1.0                 # Gauss-map scale, g = c e^{i pi/4} gamma
    mesh_nu: int = 32              # radial resolution of the R mesh
    mesh_nv: int = 32              # angular resolution
    end_cutoff: float = 4.0        # truncate necks where |g| < 1/end_cutoff
    copies: tuple = (1, 1)         # translational copies per direction
    quad_tol: float = 1e-11

    def __post_init__(self):
        if self.c <= 0:
            raise ConstructionError("the Gauss-map scale c must be positive")
        if self.end_cutoff <= 1:
            raise ConstructionError("end_cutoff must exceed 1")
        if self.mesh_nu < 8 or self.mesh_nv < 8:
            raise ConstructionError("mesh resolutions must be at least 8")


@dataclass(frozen=True)
class FieldData:
    """Weierstrass data of the field plus the chart conventions it certifies."""

    weierstrass: WeierstrassData
    gamma: GammaFn
    config: FieldConfig
    L: float                 # half period of the c0=1 square lattice
    shift: complex           # chart offset: evaluation at zeta + shift
    dir_A: complex           # unit direction TC -> A (gamma = -i t ray)
    dir_E: complex           # unit direction TC -> E (gamma = e^{-i pi/4} t ray)
    points: dict             # labels TC, BC, A, B, E -> chart coordinates

    @property
    def lattice(self) -> Lattice:
        return self.weierstrass.lattice

    def gamma_hat(self, zeta):
        return np.asarray(self.gamma.gamma(np.asarray(zeta, dtype=complex) + self.shift))

    def gamma_hat_prime(self, zeta):
        return np.asarray(self.gamma.gamma_prime(np.asarray(zeta, dtype=complex) + self.shift))


def unit_square_gamma() -> GammaFn:
    """gamma on the square torus rescaled so the algebraic equation has c0=1."""
    g = build_gamma(build_symmetric_wp(Lattice(1.0, 1j)))
    return rescale_lattice_for_unit_c0(g)


def verify_square_torus(gamma: GammaFn, tol: float = 1e-8,
                        raise_on_fail: bool = False) -> dict:
    """Certify the square-torus consistency argument along the diagonal curve.

    Traces the level curve gamma = e^{i pi/4} t, |t| > 1, and checks that
    (gamma'/gamma)^2 is purely imaginary along it; its real part measures
    the cosine term of the algebraic equation, so consistency forces
    alpha = pi/4.  Returns a report with the measured alpha; raises
    ConstructionError when requested.
    """
    lat = gamma.lattice
    ts = np.linspace(1.18, 2.6, 13)
    rng = np.random.default_rng(6)
    seeds = lat.from_coords(rng.uniform(0.02, 0.98, 900), rng.uniform(0.02, 0.98, 900))
    pts = []
    z = None
    for t in ts:
        target = np.exp(1j * np.pi / 4) * t
        if z is None:
            gz = np.asarray(gamma.gamma(seeds))
            good = np.isfinite(gz)
            z = seeds[good][np.argmin(np.abs(gz[good] - target))]
        for _ in range(60):
            gz = complex(np.atleast_1d(gamma.gamma(z))[0])
            gp = complex(np.atleast_1d(gamma.gamma_prime(z))[0])
            step = (gz - target) / gp
            z = z - step
            if abs(step) < 1e-14 * lat.scale:
                break
        gz = complex(np.atleast_1d(gamma.gamma(z))[0])
        if abs(gz - target) > 1e-9 * (1 + abs(target)):
            continue
        pts.append((t, z))
    if len(pts) < 6:
        raise ConstructionError("could not trace the diagonal level curve")

    # along the curve gamma^2 + gamma^-2 = i(t^2 - t^-2), so the real part
    # of (gamma'/gamma)^2 measures the cosine term of the algebraic
    # equation (the complementary angle theta = pi/2 - alpha)
    qs, cos2th = [], []
    for t, z in pts:
        gz = complex(np.atleast_1d(gamma.gamma(z))[0])
        gp = complex(np.atleast_1d(gamma.gamma_prime(z))[0])
        q = (gp / gz) ** 2
        qs.append(q)
        c0 = q.imag / (t**2 - t**-2)
        cos2th.append(-q.real / (2 * c0))
    qs = np.array(qs)
    cos2th = min(1.0, max(-1.0, float(np.median(cos2th))))
    alpha_measured = float(np.pi / 2 - 0.5 * np.arccos(cos2th))
    off_axis = float(np.max(np.abs(qs.real) / np.abs(qs)))
    passed = abs(alpha_measured - np.pi / 4) <= tol and abs(gamma.alpha - np.pi / 4) <= tol
    report = {
        "passed": bool(passed),
        "alpha": float(gamma.alpha),
        "alpha_measured": alpha_measured,
        "off_axis": off_axis,
        "n_curve_points": len(pts),
    }
    if raise_on_fail and not passed:
        raise ConstructionError(
            f"torus is not square: measured alpha = {alpha_measured:.6f}"
        )
    return report


def build_field_data(config: FieldConfig = FieldConfig(),
                     gamma: Optional[GammaFn] = None) -> FieldData:
    """Assemble the Weierstrass data g = c e^{i pi/4} gamma, dh = d gamma/(gamma gamma').

    In the flat chart the dh coefficient collapses to 1/gamma_hat.  The
    build certifies the square torus, the chart sign conventions, the
    degree of g, and the zero/pole bookkeeping of dh.
    """
    if gamma is None:
        gamma = unit_square_gamma()
    verify_square_torus(gamma, raise_on_fail=True)
    lat = gamma.lattice
    L = abs(lat.w1)
    shift = (lat.w1 + lat.w2) / 2.0

    def gh(zeta):
        return np.asarray(gamma.gamma(np.asarray(zeta, dtype=complex) + shift))

    def ghp(zeta):
        return np.asarray(gamma.gamma_prime(np.asarray(zeta, dtype=complex) + shift))

    # chart orientation: gamma_hat = -i t up the vertical axis and
    # +e^{-i pi/4} t along one anti-diagonal; certified, not assumed.
    probe = 0.31 * L
    v_vert = complex(np.atleast_1d(gh(1j * probe))[0])
    dir_A = 1j if (v_vert / (-1j)).real > 0 else -1j
    cands = [dir_A * np.exp(1j * np.pi / 4), dir_A * np.exp(-1j * np.pi / 4)]
    dir_E = None
    for d in cands:
        v = complex(np.atleast_1d(gh(d * probe))[0])
        if (v / np.exp(-1j * np.pi / 4)).real > 0 and abs((v / np.exp(-1j * np.pi / 4)).imag) < 1e-8 * abs(v):
            dir_E = d
            break
    if dir_E is None:
        raise ConstructionError("could not certify the anti-diagonal gamma ray")
    v_dirA = complex(np.atleast_1d(gh(dir_A * probe))[0])
    if abs((v_dirA / (-1j)).imag) > 1e-8 * abs(v_dirA):
        raise ConstructionError("gamma along the TC->A ray is not purely imaginary")

    c = config.c
    k = c * np.exp(1j * np.pi / 4)

    def g_fn(zeta):
        return k * gh(zeta)

    def g_prime_fn(zeta):
        return k * ghp(zeta)

    def dh_fn(zeta):
        gv = gh(zeta)
        return np.where(np.isfinite(gv), 1.0 / np.where(gv == 0, np.inf, gv), 0.0)

    def phi_fn(zeta):
        gv = gh(zeta)
        inv = np.where(np.isfinite(gv), 1.0 / np.where(gv == 0, np.inf, gv), 0.0)
        inv2 = inv * inv
        one = np.ones_like(inv2)
        return np.stack([
            0.5 * (inv2 / k - k * one),
            0.5j * (inv2 / k + k * one),
            inv,
        ], axis=-1)

    ends = (TorusPoint(0j, lat), TorusPoint(lat.w1 + lat.w2, lat))
    data = WeierstrassData(g_fn=g_fn, dh_fn=dh_fn, lattice=lat, ends=ends,
                           g_prime_fn=g_prime_fn, phi_fn=phi_fn)

    # bookkeeping certificates
    deg_g = count_degree(g_fn, 0.47 * c + 0.31j * c, lat, f_prime=g_prime_fn)
    if deg_g != 2:
        raise ConstructionError(f"Gauss map degree is {deg_g}, expected 2")
    pA, pB = L * dir_A, -L * (dir_A / 1j)
    for label, p in (("A", pA), ("B", pB)):
        if abs(complex(np.atleast_1d(dh_fn(np.array([p])))[0])) > 1e-8:
            raise ConstructionError(f"dh does not vanish at {label}")
    # dh bookkeeping: two simple zeros (A, B) minus two simple poles (ends) = 0
    points = {"TC": 0j, "BC": lat.w1 + lat.w2, "A": pA, "B": pB,
              "E": (pA + pB) / 2.0}
    return FieldData(weierstrass=data, gamma=gamma, config=config, L=L,
                     shift=shift, dir_A=complex(dir_A), dir_E=complex(dir_E),
                     points=points)


# ---------------------------------------------------------------------------
# periods
# ---------------------------------------------------------------------------

def end_period_closure(field: FieldData, radius_factor: float = 0.15) -> dict:
    """Period vectors of small loops around both ends; must vanish."""
    cfg = field.config
    out = {}
    for label in ("TC", "BC"):
        ctr = field.points[label]
        pv = period_vector(field.weierstrass, PathSpec.circle(ctr, radius_factor * field.L),
                           tol=cfg.quad_tol)
        pv_half = period_vector(field.weierstrass,
                                PathSpec.circle(ctr, 0.5 * radius_factor * field.L),
                                tol=cfg.quad_tol)
        if pv.magnitude > 10 * cfg.quad_tol:
            raise PeriodProblemError(
                f"end loop {label} carries period {pv.p} (|p| = {pv.magnitude:.3g})"
            )
        out[label] = {"period": pv, "shrunk": pv_half,
                      "homotopy_drift": float(np.linalg.norm(pv.p - pv_half.p))}
    return out


def translation_periods(field: FieldData) -> dict:
    """The two horizontal translation periods and the scale lambda.

    lambda is |Re int phi_1| over the straight A->B edge; the closed tent
    loops B->A->B (over A) and A->B->A (over B) give the two translation
    vectors, certified equal in magnitude (lambda sqrt 2), horizontal and
    mutually orthogonal.
    """
    cfg = field.config
    data = field.weierstrass
    A, B = field.points["A"], field.points["B"]
    seg_AB, _ = integrate(data, PathSpec.polyline([A, -B]), tol=cfg.quad_tol)
    seg_BA, _ = integrate(data, PathSpec.polyline([B, A]), tol=cfg.quad_tol)
    lam1 = abs(seg_AB.real[0])
    lam2 = abs(seg_BA.real[1])
    v1 = period_vector(data, PathSpec.polyline([B, A, -B], closed=True), tol=cfg.quad_tol)
    v2 = period_vector(data, PathSpec.polyline([-A, -B, A], closed=True), tol=cfg.quad_tol)
    lam = 0.5 * (lam1 + lam2)
    checks = {
        "lambda_phi1": lam1,
        "lambda_phi2": lam2,
        "magnitude_rel_diff": abs(v1.magnitude - v2.magnitude) / max(v1.magnitude, v2.magnitude),
        "v1_vs_lam_sqrt2": abs(v1.magnitude - lam * SQRT2) / (lam * SQRT2),
        "orthogonality": abs(float(np.dot(v1.p, v2.p))) / (v1.magnitude * v2.magnitude),
        "vertical_component": max(abs(float(v1.p[2])), abs(float(v2.p[2]))) / lam,
    }
    for name in ("magnitude_rel_diff", "v1_vs_lam_sqrt2", "orthogonality", "vertical_component"):
        if checks[name] > 1e-6:
            raise SymmetryViolationError(f"translation-period check {name} = {checks[name]:.3g}")
    return {"lambda": lam, "vectors": (v1, v2), "checks": checks}


def lambda_reference_integral(c: float, tol: float = 1e-12) -> float:
    """One-dimensional reference for lambda.

    |Re int_{B->A} phi_2| pulls back to int_1^inf (c t + 1/(c t)) dt /
    (t sqrt(t^4 - 1)); substituting 1/t^2 = sin^2(chi) regularizes both
    endpoints, giving int_0^{pi/2} (c + sin^2(chi)/c)/sqrt(1+sin^2(chi)) dchi.
    """

    def f(t):
        chi = np.asarray(t) * (np.pi / 2)
        val = (c + np.sin(chi) ** 2 / c) / np.sqrt(1.0 + np.sin(chi) ** 2)
        return (val * (np.pi / 2)).astype(complex)[:, None]

    val, _ = adaptive_quadrature(f, tol=tol)
    return float(val[0].real)


# ---------------------------------------------------------------------------
# meshing the fundamental region R
# ---------------------------------------------------------------------------

def _rim_radius(field: FieldData, phis: np.ndarray) -> np.ndarray:
    """Radius where |g| = 1/end_cutoff along each ray from TC (bisection)."""
    cutoff = field.config.end_cutoff
    target = 1.0 / cutoff
    lo = np.full(phis.shape, 1e-7 * field.L)
    hi = np.full(phis.shape, 0.65 * field.L)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        val = np.abs(field.weierstrass.g(mid * np.exp(1j * phis)))
        low = val < target
        lo = np.where(low, mid, lo)
        hi = np.where(low, hi, mid)
    return 0.5 * (lo + hi)


def mesh_fundamental_domain(field: FieldData) -> SurfaceMesh:
    """Mesh R (triangle TC-A-E) under X, truncated at the end cutoff.

    Structured polar grid about TC: angular lines interpolate between the
    nu1 ray (toward A) and the nu2 ray (toward E); the outer edge is the
    straight beta chord A-E, the inner edge the |g| = 1/end_cutoff rim.
    Radial spacing is logarithmic so triangle sizes stay balanced down the
    neck.  X values accumulate along a spanning tree of short segments
    (outer chord first, then inward along each ray).
    """
    cfg = field.config
    data = field.weierstrass
    nu, nv = cfg.mesh_nu, cfg.mesh_nv
    phi_A = float(np.angle(field.dir_A))
    phi_E = phi_A + float(np.angle(field.dir_E / field.dir_A))
    phis = phi_A + (phi_E - phi_A) * np.arange(nv + 1) / nv
    # outer radius: ray hit on the chord through A and E
    A, E = field.points["A"], field.points["E"]
    n_chord = 1j * (E - A) / abs(E - A)          # unit normal of the chord line
    d_chord = (A * np.conj(n_chord)).real
    r_max = np.abs(d_chord / np.real(np.exp(1j * phis) * np.conj(n_chord)))
    r_rim = _rim_radius(field, phis)

    frac = (np.arange(nu + 1) / nu)[:, None]
    radii = np.exp(np.log(r_rim)[None, :] + (np.log(r_max) - np.log(r_rim))[None, :] * frac)
    zeta = radii * np.exp(1j * phis)[None, :]     # (nu+1, nv+1); row nu = chord

    # X values: base at A = zeta[nu, 0]
    X = np.zeros((nu + 1, nv + 1, 3))
    err = 0.0
    for j in range(nv):
        val, e = integrate(data, PathSpec.polyline([zeta[nu, j], zeta[nu, j + 1]]),
                           tol=cfg.quad_tol)
        X[nu, j + 1] = X[nu, j] + val.real
        err += e
    for i in range(nu - 1, -1, -1):
        for j in range(nv + 1):
            val, e = integrate(data, PathSpec.polyline([zeta[i + 1, j], zeta[i, j]]),
                               tol=cfg.quad_tol)
            X[i, j] = X[i + 1, j] + val.real
            err += e

    idx = np.arange((nu + 1) * (nv + 1)).reshape(nu + 1, nv + 1)
    faces = []
    for i in range(nu):
        for j in range(nv):
            a, b = idx[i, j], idx[i + 1, j]
            cc, dd = idx[i + 1, j + 1], idx[i, j + 1]
            faces.append((a, b, cc))
            faces.append((a, cc, dd))
    tags = {
        "nu1": np.zeros(idx.size, dtype=bool),
        "nu2": np.zeros(idx.size, dtype=bool),
        "nu3": np.zeros(idx.size, dtype=bool),
        "end_rim": np.zeros(idx.size, dtype=bool),
    }
    tags["nu1"][idx[:, 0]] = True
    tags["nu2"][idx[:, nv]] = True
    tags["nu3"][idx[nu, :]] = True
    tags["end_rim"][idx[0, :]] = True

    rim_center = X[0].mean(axis=0)
    mesh = SurfaceMesh(
        vertices=X.reshape(-1, 3),
        faces=np.array(faces, dtype=np.int64),
        provenance=zeta.ravel(),
        vertex_tags=tags,
        end_markers=rim_center[None, :],
    )
    return mesh.drop_degenerate()


# ---------------------------------------------------------------------------
# replication by reflection
# ---------------------------------------------------------------------------

def _fit_reflection_plane(points: np.ndarray, tol: float):
    """Reflection across the vertical plane spanned by a planar-geodesic edge."""
    ctr = points.mean(axis=0)
    q = points - ctr
    # vertical-plane normals live among the 8 horizontal half-axis directions
    best, best_res = None, np.inf
    for kk in range(8):
        n = np.array([np.cos(kk * np.pi / 4), np.sin(kk * np.pi / 4), 0.0])
        res = np.max(np.abs(q @ n))
        if res < best_res:
            best, best_res = n, res
    if best_res > tol:
        raise SymmetryViolationError(
            f"edge is not planar in a vertical symmetry plane (residual {best_res:.3g})"
        )
    n = best
    d = float(ctr @ n)
    rot = np.eye(3) - 2.0 * np.outer(n, n)
    shift = 2.0 * d * n
    return rot, shift, best_res


def _fit_half_turn_axis(points: np.ndarray, tol: float):
    """Half turn about the horizontal straight line through the edge."""
    ctr = points.mean(axis=0)
    q = points - ctr
    best, best_res = None, np.inf
    for kk in range(8):
        u = np.array([np.cos(kk * np.pi / 4), np.sin(kk * np.pi / 4), 0.0])
        res = np.max(np.linalg.norm(q - np.outer(q @ u, u), axis=1))
        if res < best_res:
            best, best_res = u, res
    if best_res > tol:
        raise SymmetryViolationError(
            f"edge is not a straight horizontal line (residual {best_res:.3g})"
        )
    u = best
    rot = 2.0 * np.outer(u, u) - np.eye(3)
    shift = ctr - rot @ ctr
    return rot, shift, best_res


def _compose_chart(m1, m2):
    """(u1,c1,t1) after (u2,c2,t2) acting zeta -> u conj^c(zeta) + t."""
    u1, c1, t1 = m1
    u2, c2, t2 = m2
    u2e, t2e = (np.conj(u2), np.conj(t2)) if c1 else (u2, t2)
    return (u1 * u2e, c1 ^ c2, u1 * t2e + t1)


def _chart_key(m, lattice: Lattice):
    u, cflag, t = m
    tr = complex(reduce_z(t, lattice))
    s, tt = lattice.coords(np.asarray(tr))
    return (int(np.round(np.angle(u) / (np.pi / 2))) % 4, cflag,
            int(np.round(float(s) * 2)) % 2, int(np.round(float(tt) * 2)) % 2)


def _apply_chart(m, zeta):
    u, cflag, t = m
    w = np.conj(zeta) if cflag else zeta
    return u * w + t


def replicate(field: FieldData, mesh: SurfaceMesh,
              weld_rtol: float = 1e-9) -> SurfaceMesh:
    """Grow the quotient block from R's mesh and translate the copies.

    The 16 congruent images of R are placed by breadth-first Schwarz
    reflection across the three boundary curves (plane reflections for
    nu1/nu2, half turns for nu3).  Shared-boundary vertices are welded by
    torus-coordinate clustering and certified against weld_rtol * lambda;
    the block is then translated by the two period vectors.
    """
    lat = field.lattice
    periods = translation_periods(field)
    lam = periods["lambda"]
    v1 = periods["vectors"][0].p
    v2 = periods["vectors"][1].p
    fit_tol = 1e-6 * max(1.0, mesh.extent())

    phi_A = np.angle(field.dir_A)
    phi_E = phi_A + np.angle(field.dir_E / field.dir_A)
    Apt = field.points["A"]
    beta_angle = np.angle(field.points["E"] - Apt)   # chord through A and E
    u3 = np.exp(2j * beta_angle)
    gens = {
        "nu1": (np.exp(2j * phi_A), True, 0j),
        "nu2": (np.exp(2j * phi_E), True, 0j),
        "nu3": (u3, True, Apt - u3 * np.conj(Apt)),
    }

    edge_idx = {name: np.nonzero(mesh.vertex_tags[name])[0] for name in ("nu1", "nu2", "nu3")}

    def place_child(parent, rot_m, t_m, name):
        child = _compose_chart(parent, gens[name])
        pts = mesh.vertices[edge_idx[name]] @ rot_m.T + t_m
        if name in ("nu1", "nu2"):
            rot_e, t_e, _ = _fit_reflection_plane(pts, fit_tol)
        else:
            rot_e, t_e, _ = _fit_half_turn_axis(pts, fit_tol)
        return child, rot_e @ rot_m, rot_e @ t_m + t_e

    # Place the pieces fanning consecutively around each neck, so both end
    # loops close up inside the block (the end periods vanish).  The leftover
    # seams then sit on beta edges; the ones carrying the nonzero translation
    # periods stay open and are healed by the neighbouring copies.
    ident = (1.0 + 0j, False, 0j)
    placed = {_chart_key(ident, lat): (ident, np.eye(3), np.zeros(3))}
    fan = ["nu2", "nu1", "nu2", "nu1", "nu2", "nu1", "nu2"]
    m, rot_m, t_m = ident, np.eye(3), np.zeros(3)
    bc_anchor = None
    for k, name in enumerate(["nu3"] + fan):
        if k == 0:
            bc_anchor = place_child(m, rot_m, t_m, name)
            continue
        m, rot_m, t_m = place_child(m, rot_m, t_m, name)
        placed[_chart_key(m, lat)] = (m, rot_m, t_m)
    m, rot_m, t_m = bc_anchor
    placed[_chart_key(m, lat)] = (m, rot_m, t_m)
    for name in ["nu1", "nu2", "nu1", "nu2", "nu1", "nu2", "nu1"]:
        m, rot_m, t_m = place_child(m, rot_m, t_m, name)
        key = _chart_key(m, lat)
        if key in placed:
            raise SymmetryViolationError("piece fan collided with an existing piece")
        placed[key] = (m, rot_m, t_m)
    if len(placed) != 16:
        raise SymmetryViolationError(f"replication produced {len(placed)} pieces, expected 16")

    pieces = []
    for m, rot, t in placed.values():
        prov = _apply_chart(m, mesh.provenance)
        pieces.append(mesh.transformed(rot, t, provenance=prov))
    block = concatenate(pieces)
    block, worst = _weld_by_provenance(block, lat, weld_rtol * lam)
    if worst > weld_rtol * lam:
        raise SymmetryViolationError(
            f"weld mismatch {worst:.3g} exceeds {weld_rtol * lam:.3g}"
        )

    nx, ny = field.config.copies
    blocks = []
    for i in range(nx + 1):
        for j in range(ny + 1):
            blocks.append(block.translated(i * v1 + j * v2))
    total = concatenate(blocks)
    total, worst2 = _weld_by_provenance(total, lat, weld_rtol * lam)
    if worst2 > weld_rtol * lam:
        raise SymmetryViolationError(
            f"copy-seam weld mismatch {worst2:.3g} exceeds {weld_rtol * lam:.3g}"
        )
    return total


def _weld_by_provenance(mesh: SurfaceMesh, lattice: Lattice, tol: float):
    """Merge vertices that agree in torus coordinate and in position."""
    prov = reduce_z(mesh.provenance, lattice)
    s, t = lattice.coords(prov)
    s = np.mod(np.round(s * 1e7), 1e7)
    t = np.mod(np.round(t * 1e7), 1e7)
    pos = mesh.vertices
    grid = np.round(pos / max(tol, 1e-300)).astype(np.int64)
    groups: dict[tuple, int] = {}
    remap = np.empty(mesh.n_vertices, dtype=np.int64)
    rep: list[int] = []
    worst = 0.0
    for i in range(mesh.n_vertices):
        base = (int(s[i]), int(t[i]))
        hit = None
        gx, gy, gz = grid[i]
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                for dz in (-1, 0, 1):
                    j = groups.get(base + (gx + dx, gy + dy, gz + dz))
                    if j is not None and np.linalg.norm(pos[i] - pos[rep[j]]) <= 3 * tol:
                        hit = j
                        break
                if hit is not None:
                    break
            if hit is not None:
                break
        if hit is None:
            groups[base + (gx, gy, gz)] = len(rep)
            remap[i] = len(rep)
            rep.append(i)
        else:
            worst = max(worst, float(np.linalg.norm(pos[i] - pos[rep[hit]])))
            remap[i] = hit
    rep_idx = np.array(rep)
    faces = remap[mesh.faces]
    keep = (faces[:, 0] != faces[:, 1]) & (faces[:, 1] != faces[:, 2]) & (faces[:, 0] != faces[:, 2])
    tags = {}
    for name, mask in mesh.vertex_tags.items():
        out = np.zeros(len(rep_idx), dtype=bool)
        np.logical_or.at(out, remap, mask)
        tags[name] = out
    return SurfaceMesh(mesh.vertices[rep_idx], faces[keep], mesh.provenance[rep_idx],
                       tags, mesh.end_markers), worst


# ---------------------------------------------------------------------------
# probes
# ---------------------------------------------------------------------------

def embedding_probe(mesh: SurfaceMesh, exclusion_radius: float) -> dict:
    """Triangle-triangle sweep; intersections are reported, not raised."""
    from .intersect import self_intersections

    hits = self_intersections(mesh, exclusion_radius=exclusion_radius)
    return {
        "intersections": [
            {"faces": [h.face_a, h.face_b], "point": [float(x) for x in h.point]}
            for h in hits
        ],
        "exclusion_radius": float(exclusion_radius),
        "n_faces": int(mesh.n_faces),
        "clean": len(hits) == 0,
    }


def graph_injectivity_check(mesh: SurfaceMesh, grid: float = 1e-3) -> bool:
    """Injectivity probe of the (x2, x3) projection over interior samples.

    Samples face centroids of the fundamental-domain mesh, bins the
    projection, and looks for bins whose x1 spread exceeds the bin size;
    a graph in the x1 direction has none.
    """
    ctr = mesh.vertices[mesh.faces].mean(axis=1)
    scale = max(np.ptp(ctr[:, 1]), np.ptp(ctr[:, 2]))
    h = grid * scale
    keys = np.round(ctr[:, 1:] / h).astype(np.int64)
    buckets: dict[tuple, list] = {}
    for i, key in enumerate(map(tuple, keys)):
        buckets.setdefault(key, []).append(ctr[i, 0])
    for vals in buckets.values():
        if len(vals) > 1 and (max(vals) - min(vals)) > 4 * h:
            return False
    return True


def discrete_mean_curvature(mesh: SurfaceMesh) -> tuple[np.ndarray, np.ndarray]:
    """Cotangent-Laplacian mean-curvature magnitude per vertex.

    Returns (|H| array, interior mask); boundary vertices (incident to an
    edge with a single face) are excluded from the mask.
    """
    v = mesh.vertices
    f = mesh.faces
    n = len(v)
    area = np.zeros(n)
    lap = np.zeros((n, 3))
    edge_count: dict[tuple, int] = {}
    for tri in f:
        p = v[tri]
        e0, e1, e2 = p[1] - p[0], p[2] - p[1], p[0] - p[2]
        a2 = np.linalg.norm(np.cross(e0, -e2))
        if a2 < 1e-300:
            continue
        # cotangent of the angle at each vertex (dot over doubled area)
        ca = np.dot(e0, -e2) / a2        # angle at vertex 0 spans e0, -e2
        cb = np.dot(e1, -e0) / a2
        cc = np.dot(e2, -e1) / a2
        # edge (1,2) is opposite vertex 0, etc.
        for (i, j, cot) in ((tri[1], tri[2], ca), (tri[2], tri[0], cb), (tri[0], tri[1], cc)):
            lap[i] += cot * (v[j] - v[i])
            lap[j] += cot * (v[i] - v[j])
        third = a2 / 6.0
        for k in range(3):
            area[tri[k]] += third
        for (i, j) in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
            key = (min(i, j), max(i, j))
            edge_count[key] = edge_count.get(key, 0) + 1
    interior = np.ones(n, dtype=bool)
    for (i, j), cnt in edge_count.items():
        if cnt == 1:
            interior[i] = interior[j] = False
    used = np.zeros(n, dtype=bool)
    used[f.ravel()] = True
    interior &= used
    h = np.zeros(n)
    ok = area > 1e-300
    h[ok] = 0.5 * np.linalg.norm(lap[ok], axis=1) / (2.0 * area[ok])
    return h, interior


# ---------------------------------------------------------------------------
# catenoid reference data
# ---------------------------------------------------------------------------

def catenoid_reference(paper_scale: bool = False) -> WeierstrassData:
    """Catenoid data on the punctured plane: g = z, dh = dz/z.

    paper_scale=True returns the similar surface (g, dh) = (-z, 2 dz/z)
    whose immersion reproduces the classical closed form
    (x/(x^2+y^2) + x, y/(x^2+y^2) + y, 2 ln r) verbatim.
    """
    if paper_scale:
        return WeierstrassData(
            g_fn=lambda z: -np.asarray(z, dtype=complex),
            dh_fn=lambda z: 2.0 / np.asarray(z, dtype=complex),
            lattice=None,
            ends=(0j,),
            g_prime_fn=lambda z: np.full(np.shape(z), -1.0, dtype=complex),
        )
    return WeierstrassData(
        g_fn=lambda z: np.asarray(z, dtype=complex),
        dh_fn=lambda z: 1.0 / np.asarray(z, dtype=complex),
        lattice=None,
        ends=(0j,),
        g_prime_fn=lambda z: np.full(np.shape(z), 1.0, dtype=complex),
    )


def catenoid_closed_form(z, paper_scale: bool = False) -> np.ndarray:
    """Closed-form immersion matching catenoid_reference."""
    z = np.asarray(z, dtype=complex)
    x, y = z.real, z.imag
    r2 = x * x + y * y
    out = np.stack([x / r2 + x, y / r2 + y, np.log(r2)], axis=-1)
    if paper_scale:
        return out
    return np.stack([-0.5 * (x / r2 + x), -0.5 * (y / r2 + y), 0.5 * np.log(r2)], axis=-1)
