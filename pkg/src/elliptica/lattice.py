"""Lattices, torus points and shape classification.

A torus is described by two half-generators ``w1, w2``; every elliptic
evaluator built on it is periodic under the *doubled* lattice
``2*w1*Z + 2*w2*Z``.  All other modules consume the types defined here.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InvalidLatticeError

# Relative tolerance used by shape detection (see classify).
SHAPE_RTOL = 1e-9
# Relative tolerance of the lattice-membership test (see equivalent).
EQUIV_RTOL = 1e-12


@dataclass(frozen=True)
class Lattice:
    """Half-generator pair; the actual periods are 2*w1 and 2*w2."""

    w1: complex
    w2: complex

    def __post_init__(self):
        w1 = complex(self.w1)
        w2 = complex(self.w2)
        if w1 == 0 or w2 == 0:
            raise InvalidLatticeError("lattice generators must be nonzero")
        tau = w2 / w1
        if abs(tau.imag) <= 1e-14 * max(1.0, abs(tau)):
            raise InvalidLatticeError(
                f"w1/w2 must not be real (got tau = {tau!r})"
            )
        object.__setattr__(self, "w1", w1)
        object.__setattr__(self, "w2", w2)

    @property
    def tau(self) -> complex:
        return self.w2 / self.w1

    @property
    def scale(self) -> float:
        """Longest period length; reference scale for tolerances."""
        return max(abs(2 * self.w1), abs(2 * self.w2))

    @property
    def covolume(self) -> float:
        """Area of the fundamental parallelogram of the doubled lattice."""
        p1, p2 = 2 * self.w1, 2 * self.w2
        return abs(p1.real * p2.imag - p1.imag * p2.real)

    def basis_matrix(self) -> np.ndarray:
        """Real 2x2 matrix whose columns are the periods 2*w1, 2*w2."""
        p1, p2 = 2 * self.w1, 2 * self.w2
        return np.array([[p1.real, p2.real], [p1.imag, p2.imag]])

    def coords(self, z) -> tuple[np.ndarray, np.ndarray]:
        """Real coefficients (s, t) with z = s*(2*w1) + t*(2*w2)."""
        z = np.asarray(z, dtype=complex)
        m = self.basis_matrix()
        inv = np.linalg.inv(m)
        s = inv[0, 0] * z.real + inv[0, 1] * z.imag
        t = inv[1, 0] * z.real + inv[1, 1] * z.imag
        return s, t

    def from_coords(self, s, t) -> np.ndarray:
        return np.asarray(s) * (2 * self.w1) + np.asarray(t) * (2 * self.w2)

    @property
    def half_points(self) -> tuple[complex, complex, complex, complex]:
        """Representatives 0, w1, w2, w1+w2 of the half-period classes."""
        return 0j, self.w1, self.w2, self.w1 + self.w2


@dataclass(frozen=True)
class TorusPoint:
    """A reduced representative of a point class on the torus."""

    z: complex
    lattice: Lattice


@dataclass(frozen=True)
class TorusShape:
    """Shape class of a lattice presentation up to similarity z -> a*z.

    ``alpha``/``rho`` are filled in later by the elliptic evaluator
    (they need half-period values); classify only sets the tag and the
    similarity normalizer.
    """

    tag: str  # "rectangular" | "rhombic" | "square" | "generic"
    normalizer: complex
    alpha: Optional[float] = None
    rho: Optional[float] = None

    @property
    def is_rectangular(self) -> bool:
        return self.tag in ("rectangular", "square")

    @property
    def is_rhombic(self) -> bool:
        return self.tag in ("rhombic", "square")


def reduce(z, lattice: Lattice):
    """Reduce z to the half-open fundamental cell [0,1)x[0,1) in lattice coords.

    Vectorized; returns complex ndarray (or scalar for scalar input).
    The returned representative differs from z by an element of
    2*w1*Z + 2*w2*Z and the map is idempotent up to roundoff.
    """
    z = np.asarray(z, dtype=complex)
    s, t = lattice.coords(z)
    red = z - lattice.from_coords(np.floor(s), np.floor(t))
    if red.ndim == 0:
        return complex(red)
    return red


def reduce_centered(z, lattice: Lattice):
    """Reduce z to the cell with coordinates in [-1/2, 1/2)."""
    z = np.asarray(z, dtype=complex)
    s, t = lattice.coords(z)
    red = z - lattice.from_coords(np.round(s), np.round(t))
    if red.ndim == 0:
        return complex(red)
    return red


def reduce_point(z: complex, lattice: Lattice) -> TorusPoint:
    return TorusPoint(complex(reduce(z, lattice)), lattice)


def equivalent(z: complex, zeta: complex, lattice: Lattice) -> bool:
    """True iff z - zeta lies in 2*w1*Z + 2*w2*Z within a relative tolerance."""
    delta = reduce_centered(np.asarray(z, dtype=complex) - zeta, lattice)
    tol = EQUIV_RTOL * lattice.scale
    return bool(np.all(np.abs(delta) <= tol))


def torus_distance(z, zeta, lattice: Lattice):
    """Distance between point classes: |z - zeta| minimized over the lattice."""
    delta = reduce_centered(np.asarray(z, dtype=complex) - np.asarray(zeta, dtype=complex), lattice)
    # reduce_centered picks the representative with coords in [-1/2,1/2)^2,
    # which may not minimize |.| for skew cells; check the 9 neighbours.
    cands = []
    for n in (-1, 0, 1):
        for m in (-1, 0, 1):
            cands.append(np.abs(delta - lattice.from_coords(n, m)))
    return np.min(np.stack(cands), axis=0)


def classify(lattice: Lattice) -> TorusShape:
    """Classify the presentation (w1, w2) up to similarity z -> a*z.

    rectangular  <=>  w2/w1 purely imaginary (cell is an axis-aligned
                      rectangle after dividing by w1);
    rhombic      <=>  |w2| = |w1| (then some rotation makes w2 = -conj(w1));
    square       <=>  both.
    """
    tau = lattice.tau
    rect = abs(tau.real) <= SHAPE_RTOL * abs(tau)
    rhomb = abs(abs(tau) - 1.0) <= SHAPE_RTOL

    if rect and rhomb:
        tag = "square"
    elif rect:
        tag = "rectangular"
    elif rhomb:
        tag = "rhombic"
    else:
        tag = "generic"

    if rect:
        # rotate w1 onto the positive real axis
        normalizer = abs(lattice.w1) / lattice.w1
    elif rhomb:
        # choose a with (a*w2) = -conj(a*w1); phase solves e^{2ib} = -conj(w1)/w2
        ratio = -np.conj(lattice.w1) / lattice.w2
        beta = np.angle(ratio) / 2.0
        normalizer = np.exp(1j * beta)
        if np.angle(normalizer * lattice.w1) <= 0:
            normalizer = -normalizer
    else:
        normalizer = 1.0 + 0j
    return TorusShape(tag=tag, normalizer=complex(normalizer))
