"""Exception types shared across the package."""


class SurfCensusError(Exception):
    """Base class for all library errors."""


class NotHyperbolic(SurfCensusError):
    """A matrix expected to be hyperbolic has |trace| <= 2 + tolerance."""


class Degenerate(SurfCensusError):
    """A geometric predicate fell inside its tolerance band (shared endpoints,
    flat hulls, ...); the caller must refine rather than guess."""


class ToleranceFailure(SurfCensusError):
    """A numerical consistency check failed beyond the allowed tolerance."""


class BudgetExceeded(SurfCensusError):
    """A search passed its configured node budget.

    The partial result, when one makes sense, is attached as ``partial``.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class EmptyWord(SurfCensusError):
    """A word reduced to the identity where a nontrivial class was required."""


class ConstructionFailed(SurfCensusError):
    """A representation construction produced an invalid configuration."""


class UnsupportedCurve(SurfCensusError):
    """Twist requested about a curve outside the supported generating set."""


class InvalidHom(SurfCensusError):
    """A homomorphism spec (e.g. a zero bit vector) does not define a cover."""


class InsufficientSample(SurfCensusError):
    """A current estimate was requested with too few closed geodesics."""


class NotInvariant(SurfCensusError):
    """A point set is not closed under the claimed group action."""


class EmptyHull(SurfCensusError):
    """No nonzero homology classes below the cutoff; cannot build a norm ball."""
