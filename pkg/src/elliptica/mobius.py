"""Moebius / anti-Moebius maps and certified torus involutions.

A map is stored as a 2x2 complex matrix plus a conjugate-first flag
(anti-holomorphic maps apply complex conjugation before the fractional
linear part), so composition parity is mechanical.  Involutions of the
torus are affine maps z -> -z + t or z -> +/- conj(z) + t; the induced
sphere involutions are fitted from probe values and then certified.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .errors import (
    InvalidInputError,
    InvalidMapError,
    NoInducedInvolutionError,
    UnsupportedShapeError,
)
from .lattice import Lattice, TorusPoint, reduce_point, torus_distance

INF = complex(np.inf, 0.0)


def _is_inf(p) -> bool:
    return not np.isfinite(complex(p))


@dataclass(frozen=True)
class MobiusMap:
    """(a z + b)/(c z + d), optionally preceded by complex conjugation."""

    a: complex
    b: complex
    c: complex
    d: complex
    conjugate_first: bool = False

    def __post_init__(self):
        det = self.a * self.d - self.b * self.c
        norm = (abs(self.a) + abs(self.b) + abs(self.c) + abs(self.d)) ** 2
        if abs(det) < 1e-12 * norm or norm == 0:
            raise InvalidMapError(f"degenerate coefficients, |det| = {abs(det):.3g}")

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=complex)

    def normalized(self) -> "MobiusMap":
        """Scale so the largest-modulus coefficient is exactly 1."""
        m = self.matrix
        k = np.argmax(np.abs(m))
        return MobiusMap(*(m / m.flat[k]).ravel(), conjugate_first=self.conjugate_first)

    def __call__(self, z):
        return apply(self, z)


def identity_map() -> MobiusMap:
    return MobiusMap(1, 0, 0, 1)


def apply(m: MobiusMap, z):
    """Extended-plane evaluation; infinity in and out handled exactly.

    Accepts scalars or arrays; inf entries map through a/c.
    """
    arr = np.asarray(z, dtype=complex)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    if m.conjugate_first:
        arr = np.conj(arr)
    at_inf = ~np.isfinite(arr)
    num = m.a * np.where(at_inf, 1.0, arr) + m.b
    den = m.c * np.where(at_inf, 1.0, arr) + m.d
    num = np.where(at_inf, m.a, num)
    den = np.where(at_inf, m.c, den)
    zero_den = np.abs(den) <= 1e-300 * np.abs(num)
    out = np.where(zero_den, INF, num / np.where(zero_den, 1.0, den))
    return complex(out[0]) if scalar else out


def compose(m1: MobiusMap, m2: MobiusMap) -> MobiusMap:
    """m1 after m2: apply(compose(m1, m2), z) == apply(m1, apply(m2, z))."""
    m2mat = m2.matrix
    if m1.conjugate_first:
        m2mat = np.conj(m2mat)
    mat = m1.matrix @ m2mat
    return MobiusMap(*mat.ravel(), conjugate_first=m1.conjugate_first != m2.conjugate_first)


def inverse(m: MobiusMap) -> MobiusMap:
    mat = np.array([[m.d, -m.b], [-m.c, m.a]], dtype=complex)
    if m.conjugate_first:
        mat = np.conj(mat)
    return MobiusMap(*mat.ravel(), conjugate_first=m.conjugate_first)


def _triple_matrix(p1: complex, p2: complex, p3: complex) -> np.ndarray:
    """Matrix of the Moebius map sending (p1, p2, p3) -> (0, 1, inf)."""
    if _is_inf(p1):
        return np.array([[0, p2 - p3], [1, -p3]], dtype=complex)
    if _is_inf(p2):
        return np.array([[1, -p1], [1, -p3]], dtype=complex)
    if _is_inf(p3):
        return np.array([[1, -p1], [0, p2 - p1]], dtype=complex)
    return np.array(
        [[p2 - p3, -p1 * (p2 - p3)], [p2 - p1, -p3 * (p2 - p1)]], dtype=complex
    )


def from_three_points(pairs: Sequence[tuple[complex, complex]],
                      conjugate_first: bool = False) -> MobiusMap:
    """Unique map with p_k -> q_k for three pairs (points on the sphere).

    With conjugate_first=True the map z -> M(conj(z)) is fitted instead.
    """
    if len(pairs) != 3:
        raise InvalidInputError("exactly three point pairs are required")
    ps = [complex(p) for p, _ in pairs]
    qs = [complex(q) for _, q in pairs]
    if conjugate_first:
        ps = [np.conj(p) if np.isfinite(p) else p for p in ps]

    def distinct(vals):
        for i in range(3):
            for j in range(i + 1, 3):
                vi, vj = vals[i], vals[j]
                if _is_inf(vi) and _is_inf(vj):
                    return False
                if not _is_inf(vi) and not _is_inf(vj) and abs(vi - vj) < 1e-13 * (1 + abs(vi)):
                    return False
        return True

    if not distinct(ps) or not distinct(qs):
        raise InvalidInputError("source and target triples must be pairwise distinct")

    mp = _triple_matrix(*ps)
    mq = _triple_matrix(*qs)
    mat = np.array([[mq[1, 1], -mq[0, 1]], [-mq[1, 0], mq[0, 0]]], dtype=complex) @ mp
    return MobiusMap(*mat.ravel(), conjugate_first=conjugate_first).normalized()


# ---------------------------------------------------------------------------
# torus involutions
# ---------------------------------------------------------------------------

STANDARD_KINDS = ("neg", "H", "I1", "I2", "I3", "I4", "I5", "I6")


@dataclass(frozen=True)
class TorusInvolution:
    """Affine involution z -> sign * (conj?) z + t of a given torus.

    kind is a label from STANDARD_KINDS (or "custom"); anti is True for
    the reflections (conjugating maps).
    """

    kind: str
    sign: int            # +1 or -1 applied after the optional conjugation
    anti: bool
    t: complex
    lattice: Lattice

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        w = np.conj(z) if self.anti else z
        out = self.sign * w + self.t
        return complex(out) if out.ndim == 0 else out

    def check(self, n: int = 1000, seed: int = 3, tol: float = 1e-10) -> float:
        """Max torus distance of I(I(z)) from z over random points."""
        rng = np.random.default_rng(seed)
        z = self.lattice.from_coords(rng.uniform(0, 1, n), rng.uniform(0, 1, n))
        d = torus_distance(self(self(z)), z, self.lattice)
        worst = float(np.max(d))
        if worst > tol * self.lattice.scale:
            raise InvalidInputError(f"not an involution on this torus (residual {worst:.3g})")
        return worst


def standard_involution(kind: str, lattice: Lattice) -> TorusInvolution:
    """The named involutions; reflections require the matching lattice shape."""
    w1, w2 = lattice.w1, lattice.w2
    table = {
        "neg": (-1, False, 0j),
        "H": (-1, False, w1 + w2),
        "I1": (1, True, 0j),
        "I2": (-1, True, 0j),
        "I3": (1, True, w2),
        "I4": (-1, True, w1),
        "I5": (1, True, w1 + w2),
        "I6": (-1, True, w1 - w2),
    }
    if kind not in table:
        raise InvalidInputError(f"unknown involution kind {kind!r}")
    sign, anti, t = table[kind]
    inv = TorusInvolution(kind=kind, sign=sign, anti=anti, t=t, lattice=lattice)
    inv.check()
    return inv


def shape_involutions(lattice: Lattice, tag: str) -> list[str]:
    """Kinds applicable to a lattice presentation of the given shape tag."""
    if tag in ("rectangular", "square"):
        return ["neg", "H", "I1", "I2", "I3", "I4"]
    if tag == "rhombic":
        return ["neg", "H", "I1", "I2", "I5", "I6"]
    return ["neg", "H"]


def fixed_points(inv: TorusInvolution, lattice: Lattice):
    """Fixed set of the involution on the torus.

    Rotations (sign=-1, no conjugation) have four isolated fixed points:
    t/2 plus the half-period classes.  Reflections fix one or two closed
    curves; these are returned as parametric descriptors
    {"type": "line", "base": z0, "direction": d} with d a unit complex.
    """
    if not inv.anti:
        if inv.sign != -1:
            return [reduce_point(0j, lattice)] if abs(inv.t) < 1e-14 else []
        base = inv.t / 2
        pts = [base, base + lattice.w1, base + lattice.w2, base + lattice.w1 + lattice.w2]
        return [reduce_point(p, lattice) for p in pts]

    # Reflection conj(z)*sign + t: fixed curves are lines.  Solve for a point
    # z0 with I(z0) ~ z0 on a fine grid, polish, then take the direction of
    # the +1 eigenvector of the differential (sign * conj).
    direction = 1.0 if inv.sign == 1 else 1j
    # d must satisfy sign * conj(d) = d
    descriptors = []
    seen: list[complex] = []
    grid = 48
    s = (np.arange(grid) + 0.5) / grid
    t = (np.arange(grid) + 0.5) / grid
    S, T = np.meshgrid(s, t, indexing="ij")
    z = lattice.from_coords(S.ravel(), T.ravel())
    d = torus_distance(inv(z), z, lattice)
    cand = z[d < 0.45 * lattice.scale / grid * 4]
    from .lattice import reduce_centered

    for z0 in cand:
        # polish: I(z) - z points along the line normal; halving the reduced
        # gap converges onto the fixed line
        for _ in range(60):
            gap = complex(reduce_centered(complex(inv(z0) - z0), lattice))
            z0 = z0 + gap / 2
            if abs(gap) < 1e-13 * lattice.scale:
                break
        if torus_distance(inv(z0), z0, lattice) > 1e-10 * lattice.scale:
            continue
        # dedup against lines already found (distance from z0 to the line mod lattice)
        new = True
        for zs in seen:
            delta = z0 - zs
            # distance to the line zs + u*direction, minimized over the lattice
            best = np.inf
            for n in (-2, -1, 0, 1, 2):
                for m in (-2, -1, 0, 1, 2):
                    dd = delta + lattice.from_coords(n, m)
                    off = dd - direction * (dd * np.conj(direction)).real
                    best = min(best, abs(off))
            if best < 1e-6 * lattice.scale:
                new = False
                break
        if new:
            seen.append(complex(z0))
            descriptors.append({"type": "line", "base": complex(z0), "direction": complex(direction)})
    return descriptors


def induced_involution(
    inv: TorusInvolution,
    f: Callable,
    probe_points: Iterable[complex],
    certify_n: int = 100,
    tol: float = 1e-8,
    seed: int = 9,
) -> MobiusMap:
    """The unique sphere involution J with J(f(z)) = f(I(z)).

    Fitted through three well-separated probe pairs, then certified on all
    probes and verified to be an involution at random arguments.  Raises
    NoInducedInvolutionError when the defining relation fails, which is
    exactly the induced-involution existence criterion failing.
    """
    probes = np.asarray(list(probe_points), dtype=complex)
    if probes.size < 3:
        raise InvalidInputError("need at least three probe points")
    fz = np.asarray(f(probes), dtype=complex)
    fIz = np.asarray(f(inv(probes)), dtype=complex)
    finite = np.isfinite(fz) & np.isfinite(fIz)
    fz, fIz = fz[finite], fIz[finite]
    if fz.size < 3:
        raise InvalidInputError("probe set does not give three finite value pairs")

    # pick the best-conditioned triple: maximize the pairwise chordal spread
    def chordal(u, v):
        return np.abs(u - v) / np.sqrt((1 + np.abs(u) ** 2) * (1 + np.abs(v) ** 2))

    idx = np.argsort(np.abs(fz))
    best, best_score = None, -1.0
    cand = idx[np.linspace(0, idx.size - 1, min(idx.size, 8)).astype(int)]
    for i in range(len(cand)):
        for j in range(i + 1, len(cand)):
            for k in range(j + 1, len(cand)):
                a, b, c = cand[i], cand[j], cand[k]
                score = min(chordal(fz[a], fz[b]), chordal(fz[a], fz[c]), chordal(fz[b], fz[c]))
                if score > best_score:
                    best_score, best = score, (a, b, c)
    if best is None or best_score < 1e-3:
        raise InvalidInputError("probe values are too degenerate to fit a map")
    a, b, c = best
    fit = from_three_points(
        [(fz[a], fIz[a]), (fz[b], fIz[b]), (fz[c], fIz[c])],
        conjugate_first=inv.anti,
    )

    # certification 1: the defining relation on every probe
    pred = apply(fit, fz)
    rel = chordal(pred, fIz)
    if np.max(rel) > tol:
        raise NoInducedInvolutionError(
            f"J o f != f o I on the probe set (max chordal residual {np.max(rel):.3g})"
        )
    # certification 2: involution property at random arguments
    rng = np.random.default_rng(seed)
    w = rng.standard_normal(certify_n) + 1j * rng.standard_normal(certify_n)
    ww = apply(fit, apply(fit, w))
    if np.max(chordal(ww, w)) > tol:
        raise NoInducedInvolutionError(
            f"fitted map is not an involution (residual {np.max(chordal(ww, w)):.3g})"
        )
    return fit
