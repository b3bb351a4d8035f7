"""Weierstrass-representation engine.

Forms, adaptive path/period integration, the surface map, Gauss map,
metric and curvature, and the asymptotic/principal line tests.  Everything
is chart-based: a WeierstrassData carries samplers for g and for the
coefficient of dh in the flat chart, so the forms are plain functions of
the chart coordinate and paths are curves in that chart.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import InvalidInputError, PathTooCloseError, ToleranceNotMetError
from .lattice import Lattice, TorusPoint, torus_distance

# ---------------------------------------------------------------------------
# Gauss-Kronrod 7/15 constants (QUADPACK QK15)
# ---------------------------------------------------------------------------

_XGK = np.array([
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.0,
])
_WGK = np.array([
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728,
])
_WG = np.array([
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469,
])

# full 15-node arrays on [-1, 1]
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])          # ascending
_WK = np.concatenate([_WGK[:-1], _WGK[::-1]])
_WGAUSS = np.zeros(15)
_WGAUSS[1:-1:2] = np.concatenate([_WG[:-1], _WG[::-1]])     # Gauss nodes interleave


def _gk15_batch(fun: Callable, a: np.ndarray, b: np.ndarray):
    """Apply G7/K15 to a batch of intervals; fun maps t-array -> (n, k) values.

    Returns (kronrod (m,k), error (m,)) for m intervals.
    """
    half = (b - a) / 2.0
    mid = (a + b) / 2.0
    t = (mid[:, None] + half[:, None] * _NODES[None, :]).ravel()
    vals = np.asarray(fun(t))
    k = vals.shape[-1] if vals.ndim > 1 else 1
    vals = vals.reshape(a.size, _NODES.size, k)
    ik = (vals * _WK[None, :, None]).sum(axis=1) * half[:, None]
    ig = (vals * _WGAUSS[None, :, None]).sum(axis=1) * half[:, None]
    err = np.abs(ik - ig).max(axis=1)
    return ik, err


def adaptive_quadrature(fun: Callable, tol: float, max_depth: int = 48,
                        max_intervals: int = 20000):
    """Adaptive G7/K15 on [0, 1] for a vector-valued integrand.

    fun(t) -> (len(t), k) complex values.  Returns (integral (k,), error).
    Raises ToleranceNotMetError (with the achieved estimate attached) when
    subdivision stalls.
    """
    a = np.array([0.0])
    b = np.array([1.0])
    vals, errs = _gk15_batch(fun, a, b)
    done_val = np.zeros(vals.shape[1], dtype=complex)
    done_err = 0.0
    for depth in range(max_depth):
        total = done_err + errs.sum()
        if total <= tol:
            break
        # settle intervals that already meet their error share
        share = tol * (b - a) / max(1e-300, (b - a).sum()) * 0.5
        ok = errs <= share
        if ok.any():
            done_val += vals[ok].sum(axis=0)
            done_err += errs[ok].sum()
            a, b, vals, errs = a[~ok], b[~ok], vals[~ok], errs[~ok]
        if a.size == 0:
            break
        if a.size * 2 > max_intervals:
            raise ToleranceNotMetError(
                f"interval budget exhausted (achieved {done_err + errs.sum():.3g})",
                achieved=float(done_err + errs.sum()),
            )
        mid = (a + b) / 2.0
        a = np.concatenate([a, mid])
        b = np.concatenate([mid, b])
        vals, errs = _gk15_batch(fun, a, b)
    else:
        raise ToleranceNotMetError(
            f"max depth reached (achieved {done_err + errs.sum():.3g})",
            achieved=float(done_err + errs.sum()),
        )
    return done_val + vals.sum(axis=0), float(done_err + errs.sum())


# ---------------------------------------------------------------------------
# paths
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PathSpec:
    """Piecewise path in the flat chart: straight segments and circular arcs.

    Each segment is ("line", z0, z1) or ("arc", center, radius, a0, a1)
    with a0, a1 angles in radians; the parameter runs over [0, 1] per
    segment.
    """

    segments: tuple
    closed: bool = False

    @staticmethod
    def polyline(points: Sequence[complex], closed: bool = False) -> "PathSpec":
        """closed=True marks the endpoints as identified (equal or congruent
        modulo the lattice); no closing segment is inserted."""
        pts = [complex(p) for p in points]
        segs = tuple(("line", pts[i], pts[i + 1]) for i in range(len(pts) - 1))
        return PathSpec(segments=segs, closed=closed)

    @staticmethod
    def circle(center: complex, radius: float, turns: float = 1.0,
               start_angle: float = 0.0) -> "PathSpec":
        segs = tuple(
            ("arc", complex(center), float(radius),
             start_angle + 2 * np.pi * turns * k / 4,
             start_angle + 2 * np.pi * turns * (k + 1) / 4)
            for k in range(4)
        )
        return PathSpec(segments=segs, closed=abs(turns - round(turns)) < 1e-12)

    def reversed(self) -> "PathSpec":
        segs = []
        for s in self.segments[::-1]:
            if s[0] == "line":
                segs.append(("line", s[2], s[1]))
            else:
                segs.append(("arc", s[1], s[2], s[4], s[3]))
        return PathSpec(segments=tuple(segs), closed=self.closed)

    def segment_param(self, seg):
        """Return (z(t), dz(t)) callables for t in [0, 1]."""
        if seg[0] == "line":
            _, z0, z1 = seg

            def z(t):
                return z0 + (z1 - z0) * t

            def dz(t):
                return np.full_like(np.asarray(t, dtype=float), z1 - z0, dtype=complex)

            return z, dz
        _, center, radius, a0, a1 = seg

        def z(t):
            return center + radius * np.exp(1j * (a0 + (a1 - a0) * t))

        def dz(t):
            return 1j * (a1 - a0) * radius * np.exp(1j * (a0 + (a1 - a0) * t))

        return z, dz

    def sample(self, n_per_seg: int = 64, endpoints: bool = False) -> np.ndarray:
        pts = []
        lo, hi = (0.0, 1.0) if endpoints else (0.5 / n_per_seg, 1 - 0.5 / n_per_seg)
        t = np.linspace(lo, hi, n_per_seg)
        for seg in self.segments:
            z, _ = self.segment_param(seg)
            pts.append(z(t))
        return np.concatenate(pts)

    def endpoints(self) -> tuple[complex, complex]:
        first, last = self.segments[0], self.segments[-1]
        z0 = first[1] if first[0] == "line" else first[1] + first[2] * np.exp(1j * first[3])
        z1 = last[2] if last[0] == "line" else last[1] + last[2] * np.exp(1j * last[4])
        return z0, z1


# ---------------------------------------------------------------------------
# Weierstrass data and forms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WeierstrassData:
    """Samplers for the Gauss-map projection g and the dh chart coefficient.

    ``phi_fn``, when given, evaluates the three form coefficients directly
    in a numerically stable way (products like g*dh can be finite at poles
    of g); otherwise the forms are assembled naively from g_fn and dh_fn.
    ``g_prime_fn`` feeds the curvature formulas; central differences are
    used when it is absent.
    """

    g_fn: Callable
    dh_fn: Callable
    lattice: Optional[Lattice]
    ends: tuple = ()
    g_prime_fn: Optional[Callable] = None
    phi_fn: Optional[Callable] = field(default=None, repr=False)

    def g(self, z):
        return np.asarray(self.g_fn(np.asarray(z, dtype=complex)), dtype=complex)

    def dh(self, z):
        return np.asarray(self.dh_fn(np.asarray(z, dtype=complex)), dtype=complex)

    def g_prime(self, z):
        z = np.asarray(z, dtype=complex)
        if self.g_prime_fn is not None:
            return np.asarray(self.g_prime_fn(z), dtype=complex)
        h = 1e-6 * (self.lattice.scale if self.lattice else 1.0)
        return (self.g(z + h) - self.g(z - h)) / (2 * h)

    def end_distance(self, z):
        z = np.asarray(z, dtype=complex)
        if not self.ends:
            return np.full(z.shape, np.inf)
        dists = []
        for e in self.ends:
            ez = e.z if isinstance(e, TorusPoint) else complex(e)
            if self.lattice is not None:
                dists.append(torus_distance(z, ez, self.lattice))
            else:
                dists.append(np.abs(z - ez))
        return np.min(np.stack(dists), axis=0)


def forms(data: WeierstrassData, z):
    """Chart coefficients (phi1, phi2, phi3); phi3 is the dh coefficient."""
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    if data.phi_fn is not None:
        out = np.asarray(data.phi_fn(z), dtype=complex)
    else:
        # naive assembly: singularities of g propagate as non-finite values;
        # data whose products like g*dh stay finite at poles must supply a
        # stable phi_fn instead
        g = data.g(z)
        dh = data.dh(z)
        finite = np.isfinite(g)
        with np.errstate(divide="ignore", invalid="ignore"):
            inv = np.where(finite & (g != 0), 1.0 / np.where(g == 0, 1.0, g), 0.0)
            inv = np.where(finite & (g == 0), np.inf, inv)
            gg = np.where(finite, g, np.inf)
            out = np.stack([
                0.5 * (inv - gg) * dh,
                0.5j * (inv + gg) * dh,
                dh,
            ], axis=-1)
    return out[0] if scalar else out


def conformality_residual(data: WeierstrassData, z) -> np.ndarray:
    """|phi1^2 + phi2^2 + phi3^2| / |phi|^2 (should be ~machine epsilon)."""
    p = np.atleast_2d(forms(data, z))
    num = np.abs((p**2).sum(axis=-1))
    den = (np.abs(p) ** 2).sum(axis=-1)
    return num / np.where(den == 0, 1.0, den)


MIN_END_CLEARANCE_FACTOR = 1e-3  # times |2 w1|


def _check_clearance(data: WeierstrassData, path: PathSpec):
    if data.lattice is None or not data.ends:
        return
    limit = MIN_END_CLEARANCE_FACTOR * abs(2 * data.lattice.w1)
    d = data.end_distance(path.sample(64, endpoints=True))
    if np.min(d) < limit:
        raise PathTooCloseError(
            f"path comes within {np.min(d):.3g} of an end (limit {limit:.3g})"
        )


def integrate(data: WeierstrassData, path: PathSpec, tol: float = 1e-10):
    """Integral of (phi1, phi2, phi3) along the path, additive over segments.

    Returns (complex triple, error estimate).
    """
    _check_clearance(data, path)
    total = np.zeros(3, dtype=complex)
    err = 0.0
    for seg in path.segments:
        z, dz = path.segment_param(seg)

        def fun(t, z=z, dz=dz):
            return forms(data, z(t)) * dz(t)[:, None]

        val, e = adaptive_quadrature(fun, tol=tol / max(1, len(path.segments)))
        total += val
        err += e
    return total, err


def surface_map(data: WeierstrassData, base, p, hint: Sequence[complex] = (),
                tol: float = 1e-10) -> np.ndarray:
    """X(p) = Re integral of the forms from base to p along the hinted route."""
    zb = base.z if isinstance(base, TorusPoint) else complex(base)
    zp = p.z if isinstance(p, TorusPoint) else complex(p)
    pts = [zb, *[complex(h) for h in hint], zp]
    val, _ = integrate(data, PathSpec.polyline(pts), tol=tol)
    return val.real.copy()


@dataclass(frozen=True)
class PeriodVector:
    """Real part of the loop integral of the forms, with its error estimate."""

    p: np.ndarray
    error: float

    @property
    def magnitude(self) -> float:
        return float(np.linalg.norm(self.p))


def period_vector(data: WeierstrassData, loop: PathSpec, tol: float = 1e-10) -> PeriodVector:
    if not loop.closed:
        z0, z1 = loop.endpoints()
        ok = (data.lattice is not None and
              torus_distance(z0, z1, data.lattice) < 1e-9 * data.lattice.scale) or abs(z0 - z1) < 1e-12
        if not ok:
            raise InvalidInputError("period_vector requires a closed loop")
    val, err = integrate(data, loop, tol=tol)
    return PeriodVector(p=val.real.copy(), error=err)


# ---------------------------------------------------------------------------
# pointwise geometry
# ---------------------------------------------------------------------------

def gauss_map(data: WeierstrassData, z) -> np.ndarray:
    """Unit normal via stereographic unprojection of g; g=inf -> north pole."""
    g = np.atleast_1d(data.g(z))
    n = np.empty(g.shape + (3,))
    big = ~np.isfinite(g) | (np.abs(g) > 1.0)
    gs = np.where(big, 1.0, g)
    d = np.abs(gs) ** 2 + 1.0
    n[..., 0] = 2 * gs.real / d
    n[..., 1] = 2 * gs.imag / d
    n[..., 2] = (np.abs(gs) ** 2 - 1.0) / d
    with np.errstate(invalid="ignore"):
        w = np.where(~np.isfinite(g) | (g == 0), 0.0,
                     1.0 / np.where(big & np.isfinite(g), g, 1.0))
    dw = np.abs(w) ** 2 + 1.0
    nw = np.stack([2 * w.real / dw, -2 * w.imag / dw, (1.0 - np.abs(w) ** 2) / dw], axis=-1)
    n = np.where(big[..., None], nw, n)
    return n[0] if np.ndim(z) == 0 else n


def metric_ds(data: WeierstrassData, z, degenerate_tol: float = 1e-13):
    """(conformal factor, degenerate mask): ds = factor * |dz|.

    The mask marks points where dh vanishes while g is regular (neither
    zero nor pole), which would degenerate the metric.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    g = data.g(z)
    dh = data.dh(z)
    absg = np.abs(g)
    with np.errstate(invalid="ignore"):
        lam = 0.5 * (absg + 1.0 / np.where(absg == 0, np.inf, absg)) * np.abs(dh)
        lam = np.where(np.isfinite(g), lam, np.inf * np.abs(dh))
    # g = inf with dh -> 0 can still be regular: |g dh| limit; recompute via forms
    phi = np.atleast_2d(forms(data, z))
    lam = np.where(np.isfinite(lam), lam, np.linalg.norm(np.abs(phi), axis=-1))
    regular_g = np.isfinite(g) & (absg > degenerate_tol) & (absg < 1.0 / degenerate_tol)
    degenerate = regular_g & (np.abs(dh) < degenerate_tol)
    if np.ndim(z) == 0:
        return float(lam[0]), bool(degenerate[0])
    return lam, degenerate


def curvature_K(data: WeierstrassData, z):
    """Gauss curvature; <= 0 away from ends and degeneracies."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    g = data.g(z)
    gp = data.g_prime(z)
    dh = data.dh(z)
    absg = np.abs(g)
    pref = 2.0 / (absg + 1.0 / np.where(absg == 0, np.inf, absg))
    ratio = np.abs(gp / g / dh)
    K = -(pref**4) * ratio**2
    return float(K[0]) if np.ndim(z) == 0 else K


def curvature_density(data: WeierstrassData, z):
    """K dA per unit chart area: -4 |g'|^2 / (1 + |g|^2)^2 (dh-free)."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    g = data.g(z)
    gp = data.g_prime(z)
    big = ~np.isfinite(g) | (np.abs(g) > 1e6)
    out = np.where(big, 0.0, -4.0 * np.abs(gp) ** 2 / (1.0 + np.abs(np.where(big, 0, g)) ** 2) ** 2)
    return out


def total_curvature(data: WeierstrassData, n: int = 128, end_cutoff: float = 50.0) -> float:
    """Flat-chart midpoint quadrature of K dA over the torus minus end caps.

    Cells where |g| < 1/end_cutoff (the catenoidal necks, g -> 0 at the
    ends) are excluded; the discarded spherical caps contribute
    O(deg(g)/end_cutoff^2), well inside the acceptance budget.
    """
    lat = data.lattice
    s = (np.arange(n) + 0.5) / n
    S, T = np.meshgrid(s, s, indexing="ij")
    z = lat.from_coords(S.ravel(), T.ravel())
    dens = curvature_density(data, z)
    g = data.g(z)
    keep = np.abs(g) >= 1.0 / end_cutoff
    cell_area = lat.covolume / (n * n)
    return float(dens[keep].sum() * cell_area)


# ---------------------------------------------------------------------------
# line classification
# ---------------------------------------------------------------------------

def _line_product(data: WeierstrassData, sigma: PathSpec, n_samples: int):
    """(dg/g)(sigma') * dh(sigma') sampled along the path."""
    vals = []
    t = np.linspace(0.06, 0.94, n_samples)
    for seg in sigma.segments:
        z, dz = sigma.segment_param(seg)
        zz = z(t)
        prod = (data.g_prime(zz) / data.g(zz)) * data.dh(zz) * dz(t) ** 2
        vals.append(prod)
    return np.concatenate(vals)


def line_type(data: WeierstrassData, sigma: PathSpec, n_samples: int = 40,
              tol: float = 1e-8) -> str:
    """Classify a curve: "asymptotic" (product imaginary), "principal"
    (product real), or "neither" (mixed)."""
    prod = _line_product(data, sigma, n_samples)
    ok = np.isfinite(prod) & (np.abs(prod) > 0)
    prod = prod[ok]
    scale = np.abs(prod)
    if np.all(np.abs(prod.real) <= tol * scale):
        return "asymptotic"
    if np.all(np.abs(prod.imag) <= tol * scale):
        return "principal"
    return "neither"


def symmetry_line_check(data: WeierstrassData, sigma: PathSpec,
                        n_samples: int = 40, tol: float = 1e-8) -> bool:
    """True iff g(sigma) stays in a meridian or the equator and dh(sigma')
    is real or purely imaginary (geodesic symmetry line criterion)."""
    t = np.linspace(0.06, 0.94, n_samples)
    gvals, dhv = [], []
    for seg in sigma.segments:
        z, dz = sigma.segment_param(seg)
        zz = z(t)
        gvals.append(data.g(zz))
        dhv.append(data.dh(zz) * dz(t))
    g = np.concatenate(gvals)
    v = np.concatenate(dhv)

    finite = np.isfinite(g)
    meridian = False
    if finite.sum() >= 2:
        gf = g[finite]
        nz = np.abs(gf) > 1e-12
        if nz.any():
            ph = gf[nz] ** 2 / np.abs(gf[nz]) ** 2
            meridian = bool(np.all(np.abs(ph - np.median(ph.real) - 1j * np.median(ph.imag)) <= 10 * tol))
    equator = bool(np.all(np.abs(np.abs(g[finite]) - 1.0) <= tol))
    if not (meridian or equator):
        return False

    ok = np.isfinite(v) & (np.abs(v) > 0)
    v = v[ok]
    real_dh = np.all(np.abs(v.imag) <= tol * np.abs(v))
    imag_dh = np.all(np.abs(v.real) <= tol * np.abs(v))
    return bool(real_dh or imag_dh)


def jorge_meeks_degree(genus: int, ends: int) -> int:
    """Gauss-map degree of a complete embedded-ends example: genus + ends - 1."""
    if genus < 0 or ends < 1:
        raise InvalidInputError("genus must be >= 0 and ends >= 1")
    return genus + ends - 1
