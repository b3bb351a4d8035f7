"""Exception types shared across the package."""


class EllipticaError(Exception):
    """Base class for all errors raised by this package."""


class InvalidLatticeError(EllipticaError):
    """Lattice generators are degenerate (w1/w2 is real or a generator vanishes)."""


class IllConditionedLatticeError(EllipticaError):
    """Normalization points of the symmetric evaluator numerically coincide."""


class InconsistentEvaluatorError(EllipticaError):
    """An internal consistency check of an evaluator failed beyond tolerance."""


class InvalidMapError(EllipticaError):
    """A fractional-linear map has a (near) vanishing determinant."""


class InvalidInputError(EllipticaError):
    """Input points violate a precondition (coincident points, bad range...)."""


class NoInducedInvolutionError(EllipticaError):
    """No sphere involution is compatible with the requested torus involution."""


class UnsupportedShapeError(EllipticaError):
    """The operation requires a torus shape the given lattice does not have."""


class CountUnreliableError(EllipticaError):
    """Preimage counting did not converge to a stable answer."""


class PathTooCloseError(EllipticaError):
    """An integration path passes too close to a puncture of the surface."""


class ToleranceNotMetError(EllipticaError):
    """Adaptive quadrature could not reach the requested tolerance."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class ConstructionError(EllipticaError):
    """A surface-construction precondition failed (wrong torus, bad config)."""


class PeriodProblemError(EllipticaError):
    """An end loop carries a nonzero period; the immersion is not well defined."""


class SymmetryViolationError(EllipticaError):
    """A certified symmetry of the construction failed beyond tolerance."""
