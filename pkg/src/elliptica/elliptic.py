"""Classical P, the symmetric normalization, torus constants and degree counts.

Two evaluation routes for the classical P (periods 2*w1, 2*w2) are kept
side by side:

* ``eval_P`` / ``eval_P_prime``: the literal truncated lattice sum.  Its
  truncation error falls off only like 1/radius^2 (after the symmetric
  pairing), so it serves as a slow, independent reference.
* a theta-series backend (log-derivative of theta_1), accurate to machine
  precision at ~10 terms.  ``build_symmetric_wp`` uses it by default and
  cross-checks it against the lattice sum at build time.

The symmetric evaluator is the Moebius rescaling wp = a/(P - b) pinned by
wp(0) = 0, wp(w1+w2) = inf, wp((w1+w2)/2) = i.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import (
    CountUnreliableError,
    IllConditionedLatticeError,
    InconsistentEvaluatorError,
    InvalidLatticeError,
)
from .lattice import Lattice, TorusShape, classify, reduce_centered, torus_distance

POLE = complex(np.inf, 0.0)


def is_pole(values) -> np.ndarray:
    """Mask of entries carrying the pole signal."""
    return ~np.isfinite(np.asarray(values, dtype=complex))


# ---------------------------------------------------------------------------
# Lattice-sum route (Eq.-(1) style truncated sums)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LatticeSumPolicy:
    """Truncation control for the direct lattice sums.

    ``tail_estimate`` bounds the discarded tail of the symmetric square
    truncation: after pairing w with -w the leading surviving term is
    3 z^2/w^4, so the tail behaves like 3|z|^2 * (2 pi / covol) / (2 R^2)
    with R the shortest lattice distance to the cut.  A tail_tol below
    what the radius can deliver is rejected, because no truncated sum
    can honour it.
    """

    radius: int = 60
    tail_tol: Optional[float] = None

    def __post_init__(self):
        if self.radius < 4:
            raise InvalidLatticeError("lattice-sum radius must be >= 4")
        if self.tail_tol is not None and self.tail_tol <= 0:
            raise InvalidLatticeError("tail_tol must be positive")

    def tail_estimate(self, lattice: Lattice, zmax: float = 2.0) -> float:
        sv = np.linalg.svd(lattice.basis_matrix(), compute_uv=False)
        rmin = self.radius * sv[-1]
        density = 2.0 * np.pi / lattice.covolume
        t4 = 3.0 * zmax**2 * density / (2.0 * rmin**2)
        t6 = 5.0 * zmax**4 * density / (4.0 * rmin**4)
        return float(t4 + t6)

    def validate(self, lattice: Lattice, zmax: float = 2.0) -> float:
        est = self.tail_estimate(lattice, zmax)
        if self.tail_tol is not None and est > self.tail_tol:
            raise InvalidLatticeError(
                f"radius {self.radius} can only bound the tail by {est:.3g}, "
                f"tighter than the requested tail_tol {self.tail_tol:.3g} is unattainable"
            )
        return est


def _lattice_points(lattice: Lattice, radius: int, drop_origin: bool) -> np.ndarray:
    n = np.arange(-radius, radius + 1)
    N, M = np.meshgrid(n, n, indexing="ij")
    w = (2 * lattice.w1) * N.ravel() + (2 * lattice.w2) * M.ravel()
    if drop_origin:
        w = w[(N.ravel() != 0) | (M.ravel() != 0)]
    return w


def eval_P(z, lattice: Lattice, policy: LatticeSumPolicy = LatticeSumPolicy()):
    """Truncated symmetric-square sum for the classical P.

    Vectorized over z.  Points on the period lattice get the pole signal.
    """
    policy.validate(lattice)
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    on_pole = torus_distance(z, 0.0, lattice) < 1e-12 * lattice.scale
    w = _lattice_points(lattice, policy.radius, drop_origin=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = 1.0 / np.where(on_pole, np.nan, z) ** 2
        # chunk the lattice axis to bound memory
        for k in range(0, w.size, 4096):
            wc = w[k:k + 4096]
            out = out + ((1.0 / (z[:, None] - wc[None, :]) ** 2) - 1.0 / wc[None, :] ** 2).sum(axis=1)
    out = np.where(on_pole, POLE, out)
    return complex(out[0]) if scalar else out


def eval_P_prime(z, lattice: Lattice, policy: LatticeSumPolicy = LatticeSumPolicy()):
    """Term-wise derivative of the truncated sum: -2 sum 1/(z-w)^3."""
    policy.validate(lattice)
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    on_pole = torus_distance(z, 0.0, lattice) < 1e-12 * lattice.scale
    w = _lattice_points(lattice, policy.radius, drop_origin=False)
    zs = np.where(on_pole, np.nan, z)
    out = np.zeros_like(z)
    with np.errstate(divide="ignore", invalid="ignore"):
        for k in range(0, w.size, 4096):
            wc = w[k:k + 4096]
            out = out + (-2.0 / (zs[:, None] - wc[None, :]) ** 3).sum(axis=1)
    out = np.where(on_pole, POLE, out)
    return complex(out[0]) if scalar else out


def eval_P_richardson(z, lattice: Lattice, radius: int = 80):
    """Two-level Richardson extrapolation of the lattice sum (oracle helper)."""
    v1 = eval_P(z, lattice, LatticeSumPolicy(radius=radius))
    v2 = eval_P(z, lattice, LatticeSumPolicy(radius=2 * radius))
    return (4.0 * v2 - v1) / 3.0


# ---------------------------------------------------------------------------
# Theta-series route
# ---------------------------------------------------------------------------

class _ThetaP:
    """Classical P and P' through log-derivatives of theta_1.

    The basis is privately Gauss-conditioned (shear / swap, same lattice)
    until Im tau is large enough that ~10 series terms reach 1e-16.
    """

    def __init__(self, lattice: Lattice):
        O1, O2 = 2 * lattice.w1, 2 * lattice.w2
        if (O2 / O1).imag < 0:
            O2 = -O2
        for _ in range(16):
            tau = O2 / O1
            k = np.round(tau.real)
            if k != 0:
                O2 = O2 - k * O1
                tau = O2 / O1
            if abs(tau) < 1 - 1e-12:
                O1, O2 = O2, -O1
            else:
                break
        self.O1, self.O2 = O1, O2
        self.tau = O2 / O1
        imt = self.tau.imag
        if imt <= 0:
            raise InvalidLatticeError("basis conditioning failed (degenerate lattice)")
        self.q = np.exp(1j * np.pi * self.tau)
        nterms = int(max(6, np.ceil(np.sqrt(42.0 / (np.pi * imt))) + 3))
        n = np.arange(nterms)
        self._coef = (-1.0) ** n * self.q ** ((n + 0.5) ** 2)
        self._odd = 2 * n + 1
        self._lam3 = -((self._coef * self._odd**3).sum()
                       / (self._coef * self._odd).sum())  # theta1'''(0)/theta1'(0)
        b = np.array([[self.O1.real, self.O2.real], [self.O1.imag, self.O2.imag]])
        self._binv = np.linalg.inv(b)

    def _reduce(self, z: np.ndarray) -> np.ndarray:
        s = self._binv[0, 0] * z.real + self._binv[0, 1] * z.imag
        t = self._binv[1, 0] * z.real + self._binv[1, 1] * z.imag
        return z - (np.round(s) * self.O1 + np.round(t) * self.O2)

    def eval(self, z, derivative: bool = True):
        """Return (P, P') vectorized over z; lattice points map to the pole signal."""
        z = np.asarray(z, dtype=complex)
        shape = z.shape
        zr = self._reduce(z.ravel())
        u = np.pi * zr / self.O1
        pole = np.abs(u) < 1e-14
        usafe = np.where(pole, 1.0, u)
        arg = usafe[:, None] * self._odd[None, :]
        s = np.sin(arg)
        c = np.cos(arg)
        t0 = 2.0 * (self._coef * s).sum(axis=1)
        t1 = 2.0 * (self._coef * self._odd * c).sum(axis=1)
        t2 = -2.0 * (self._coef * self._odd**2 * s).sum(axis=1)
        r1 = t1 / t0
        d2 = t2 / t0 - r1 * r1
        pref = np.pi / self.O1
        P = pref**2 * (self._lam3 / 3.0 - d2)
        P = np.where(pole, POLE, P)
        if not derivative:
            return P.reshape(shape)
        t3 = -2.0 * (self._coef * self._odd**3 * c).sum(axis=1)
        d3 = t3 / t0 - 3.0 * (t2 / t0) * r1 + 2.0 * r1**3
        Pp = -(pref**3) * d3
        Pp = np.where(pole, POLE, Pp)
        return P.reshape(shape), Pp.reshape(shape)


# ---------------------------------------------------------------------------
# Symmetric evaluator
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SymmetricWp:
    """Normalized evaluator wp = a/(P - b) with its torus constants.

    Immutable after build; evaluation is pure and vectorized.
    """

    lattice: Lattice
    a: complex
    b: complex
    x: complex
    c: complex
    policy: LatticeSumPolicy
    shape: TorusShape
    method: str = "theta"
    _engine: Callable = field(repr=False, compare=False, default=None)

    # -- raw classical P ----------------------------------------------------
    def P(self, z):
        out = self._engine(z, derivative=False)
        return complex(out) if np.ndim(out) == 0 else out

    def P_with_prime(self, z):
        p, pp = self._engine(z)
        if np.ndim(p) == 0:
            return complex(p), complex(pp)
        return p, pp

    # -- symmetric wp --------------------------------------------------------
    def wp(self, z):
        return self._from_P(self._engine(z, derivative=False))

    def wp_with_prime(self, z):
        P, Pp = self._engine(z)
        return self._from_P(P), self._prime_from_P(P, Pp)

    def wp_prime(self, z):
        P, Pp = self._engine(z)
        return self._prime_from_P(P, Pp)

    def _from_P(self, P):
        P = np.asarray(P, dtype=complex)
        at_zero = is_pole(P)          # P pole <=> wp takes its double zero
        den = np.where(at_zero, 1.0, P - self.b)
        at_pole = np.abs(den) < 1e-12 * abs(self.a)
        den = np.where(at_pole, 1.0, den)
        out = self.a / den
        out = np.where(at_zero, 0.0, out)
        out = np.where(at_pole, POLE, out)
        if out.ndim == 0:
            return complex(out)
        return out

    def _prime_from_P(self, P, Pp):
        P = np.asarray(P, dtype=complex)
        Pp = np.asarray(Pp, dtype=complex)
        at_zero = is_pole(P)          # wp has a double zero: wp' -> 0 there
        den = np.where(at_zero, 1.0, P - self.b)
        at_pole = np.abs(den) < 1e-12 * abs(self.a)
        den = np.where(at_pole, 1.0, den)
        out = -self.a * np.where(at_zero | at_pole, 0.0, Pp) / den**2
        out = np.where(at_zero, 0.0, out)
        out = np.where(at_pole, POLE, out)
        if out.ndim == 0:
            return complex(out)
        return out


def build_symmetric_wp(
    lattice: Lattice,
    policy: LatticeSumPolicy = LatticeSumPolicy(),
    method: str = "theta",
    cross_check: bool = True,
) -> SymmetricWp:
    """Build the symmetric evaluator and its torus constants x and c.

    method "theta" (default) uses the theta backend; "sum" evaluates the
    literal truncated lattice sum under ``policy`` (slow, low accuracy,
    kept as the independent route).
    """
    if method == "theta":
        engine = _ThetaP(lattice).eval
    elif method == "sum":
        def engine(z, derivative=True, _lat=lattice, _pol=policy):
            if not derivative:
                return eval_P(z, _lat, _pol)
            return eval_P(z, _lat, _pol), eval_P_prime(z, _lat, _pol)
    else:
        raise ValueError(f"unknown method {method!r}")

    w1, w2 = lattice.w1, lattice.w2
    half_sum = w1 + w2
    b = complex(np.asarray(engine(half_sum)[0]).item())
    p_mid = complex(np.asarray(engine(half_sum / 2)[0]).item())
    if abs(p_mid - b) < 1e-10 * max(1.0, abs(b)):
        raise IllConditionedLatticeError(
            f"normalization points coincide numerically: P((w1+w2)/2) - P(w1+w2) = {p_mid - b:.3e}"
        )
    a = 1j * (p_mid - b)

    shape = classify(lattice)
    wp = SymmetricWp(lattice=lattice, a=a, b=b, x=0j, c=0j,
                     policy=policy, shape=shape, method=method, _engine=engine)
    x = complex(np.asarray(wp.wp(w1)).item())
    if x == 0 or not np.isfinite(x):
        raise IllConditionedLatticeError("wp(w1) is not a nonzero finite value")
    wp = SymmetricWp(lattice=lattice, a=a, b=b, x=x, c=0j,
                     policy=policy, shape=shape, method=method, _engine=engine)
    # the dispersion gate must not outbid the evaluation accuracy: the slow
    # sum route carries its truncation-tail budget into the check
    rtol = 1e-6 if method == "theta" else max(1e-6, 50 * policy.tail_estimate(lattice))
    c = compute_c(wp, rtol=rtol)
    shape = _fill_shape_angles(shape, x)

    if cross_check and method == "theta":
        # the slow sum route must agree within its own (coarse) tail budget
        probe = 0.31 * w1 + 0.27 * w2
        coarse = LatticeSumPolicy(radius=40)
        ref = eval_P(probe, lattice, coarse)
        val = complex(np.asarray(engine(probe)[0]).item())
        budget = 50.0 * coarse.tail_estimate(lattice, zmax=abs(probe))
        if abs(val - ref) > max(budget, 1e-6):
            raise InconsistentEvaluatorError(
                f"theta and lattice-sum routes disagree: |d| = {abs(val - ref):.3g}"
            )

    return SymmetricWp(lattice=lattice, a=a, b=b, x=x, c=c,
                       policy=policy, shape=shape, method=method, _engine=engine)


def _fill_shape_angles(shape: TorusShape, x: complex) -> TorusShape:
    alpha = rho = None
    if shape.is_rectangular:
        xr = x.real
        if abs(x.imag) <= 1e-8 * max(1.0, abs(x)):
            # wp(w1) = tan(alpha) for the positive orientation; if it came out
            # negative the roles of w1 and w2 are swapped (anti-biholomorphism)
            alpha = float(np.arctan(xr)) if xr > 0 else float(np.arctan(-1.0 / xr))
    if shape.is_rhombic:
        if abs(abs(x) - 1.0) <= 1e-8:
            rho = float(np.angle(x))
    return TorusShape(tag=shape.tag, normalizer=shape.normalizer, alpha=alpha, rho=rho)


def eval_wp(wp: SymmetricWp, z):
    return wp.wp(z)


def eval_wp_prime(wp: SymmetricWp, z):
    return wp.wp_prime(z)


def half_period_values(wp: SymmetricWp) -> dict:
    """Values of wp at the half periods plus shape-consistent angles.

    Rectangular tori report alpha with tan(alpha) = x (after orienting so
    alpha is in (0, pi/2)); rhombic tori report rho with x = e^{i rho}.
    Both satisfy wp(w2) = -1/x.
    """
    x = wp.x
    wp_w2 = complex(np.asarray(wp.wp(wp.lattice.w2)).item())
    rec = {
        "x": x,
        "wp_w2": wp_w2,
        "alpha": wp.shape.alpha,
        "rho": wp.shape.rho,
        "swapped": bool(wp.shape.is_rectangular and x.real < 0),
    }
    return rec


def _sample_points(lattice: Lattice, n: int, seed: int = 1234) -> np.ndarray:
    """Sample points of the fundamental cell staying away from the special set."""
    rng = np.random.default_rng(seed)
    pts = []
    special = [0, lattice.w1, lattice.w2, lattice.w1 + lattice.w2,
               (lattice.w1 + lattice.w2) / 2, (lattice.w1 - lattice.w2) / 2]
    floor = 0.05 * lattice.scale
    while len(pts) < n:
        s, t = rng.uniform(0.02, 0.98, size=2)
        z = lattice.from_coords(s, t)
        if min(torus_distance(z, p, lattice) for p in special) > floor:
            pts.append(z)
    return np.array(pts, dtype=complex)


def compute_c(wp: SymmetricWp, n_samples: int = 100, seed: int = 77,
              check: bool = True, rtol: float = 1e-6) -> complex:
    """Constant of the torus algebraic equation wp'^2 = c wp (wp - x)(wp + 1/x).

    Median of pointwise ratios (robust to near-pole samples), cross-checked
    against the closed form c = (y^2/w2^2) / ((1 + w1/w2)^2 (x - 1/x - 2i))
    where y is the diagonal derivative d/dt wp(t(w1+w2)) at t = 1/2, obtained
    by central differences.
    """
    z = _sample_points(wp.lattice, n_samples, seed)
    v, vp = wp.wp_with_prime(z)
    x = wp.x
    ratios = vp**2 / (v * (v - x) * (v + 1.0 / x))
    med = complex(np.median(ratios.real) + 1j * np.median(ratios.imag))
    if check:
        spread = np.abs(ratios - med) / abs(med)
        if np.median(spread) > rtol:
            raise InconsistentEvaluatorError(
                f"pointwise ratios for c scatter beyond tolerance (median spread {np.median(spread):.3g})"
            )
        formula = c_formula_route(wp)
        if abs(formula - med) / abs(med) > max(1e-5, 10 * rtol):
            raise InconsistentEvaluatorError(
                f"median-of-ratios c = {med:.9g} disagrees with the diagonal-derivative "
                f"formula {formula:.9g}"
            )
    return med


def c_formula_route(wp: SymmetricWp, h: float = 1e-5) -> complex:
    """The diagonal-derivative closed form for c (finite-difference y)."""
    w1, w2 = wp.lattice.w1, wp.lattice.w2
    d = w1 + w2

    def gamma_path(t):
        return wp.wp(t * d)

    y = (gamma_path(0.5 + h) - gamma_path(0.5 - h)) / (2 * h)
    y = complex(np.asarray(y).item())
    x = wp.x
    return (y**2 / w2**2) / ((1 + w1 / w2) ** 2 * (x - 1.0 / x - 2j))


def count_degree(
    f: Callable,
    value: complex,
    lattice: Lattice,
    grid_n: int = 24,
    f_prime: Optional[Callable] = None,
    tol: float = 1e-9,
) -> int:
    """Count preimages of ``value`` under the torus sampler ``f``.

    Grid seeding plus Newton polishing, deduplicated modulo the lattice.
    ``value`` must be generic (away from branch values); non-convergence of
    enough seeds raises CountUnreliableError.
    """
    s = (np.arange(grid_n) + 0.37) / grid_n
    t = (np.arange(grid_n) + 0.61) / grid_n
    S, T = np.meshgrid(s, t, indexing="ij")
    z = lattice.from_coords(S.ravel(), T.ravel())

    if f_prime is None:
        h = 1e-6 * lattice.scale

        def f_prime(zz):
            return (f(zz + h) - f(zz - h)) / (2 * h)

    scale = lattice.scale
    for _ in range(60):
        fz = np.asarray(f(z), dtype=complex)
        fp = np.asarray(f_prime(z), dtype=complex)
        bad = ~np.isfinite(fz) | ~np.isfinite(fp) | (np.abs(fp) < 1e-14)
        step = np.where(bad, 0.0, (fz - value) / np.where(bad, 1.0, fp))
        step_mag = np.abs(step)
        step = np.where(step_mag > 0.2 * scale, step * (0.2 * scale / np.where(step_mag == 0, 1, step_mag)), step)
        z = z - step
        if np.all(np.abs(step) < 1e-14 * scale):
            break

    fz = np.asarray(f(z), dtype=complex)
    ok = np.isfinite(fz) & (np.abs(fz - value) <= tol * (1.0 + abs(value)))
    if ok.sum() < grid_n:  # far too few basins converged
        raise CountUnreliableError(
            f"only {int(ok.sum())} of {z.size} seeds converged to the target value"
        )
    roots = z[ok]
    s, t = lattice.coords(roots)
    st = np.stack([s - np.floor(s), t - np.floor(t)], axis=1)
    # cluster in cell coordinates with a wraparound-safe metric
    reps: list[np.ndarray] = []
    for p in st:
        for r in reps:
            d = np.abs(p - r)
            d = np.minimum(d, 1.0 - d)
            if np.hypot(*d) < 1e-5:
                break
        else:
            reps.append(p)
    return len(reps)
