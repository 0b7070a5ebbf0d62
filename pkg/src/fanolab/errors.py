"""Exception types shared across the package.

Every failure mode raised by library code derives from FanolabError so
callers can catch the whole family at an experiment boundary.
"""


class FanolabError(Exception):
    pass


# -- geometry ---------------------------------------------------------------

class NonPositiveDensity(FanolabError):
    """A metric density sample is <= 0 where positivity is required."""


class NormalizationFailure(FanolabError):
    """The Ricci-potential normalization could not be solved."""


class RadiusOutOfRange(FanolabError):
    """Geodesic ball radius outside the supported range (0, 1]."""


class ProfileClassError(FanolabError):
    """Profile does not satisfy the fixed-class normalization invariant."""


class GridMismatch(FanolabError):
    """Two objects that must share a grid do not."""


# -- flow -------------------------------------------------------------------

class PositivityLoss(FanolabError):
    """The evolving density lost positivity; carries the offending sample."""

    def __init__(self, message, index=None, s=None, value=None):
        super().__init__(message)
        self.index = index
        self.s = s
        self.value = value


class StabilityViolation(FanolabError):
    """Requested explicit time step exceeds the parabolic bound."""


class ShootFailure(FanolabError):
    """Bisection on the initial additive constant failed to bracket."""


class InsufficientSnapshots(FanolabError):
    """A run-level monitor needs more recorded snapshots."""


# -- bergman ----------------------------------------------------------------

class QuadratureFailure(FanolabError):
    """Integrand tails have not converged inside the grid window."""


class MismatchedSystems(FanolabError):
    """Section systems differ in tensor power or grid."""


class MissingPotential(FanolabError):
    """Operation needs a tracked Kahler potential but the state has none."""


# -- lct --------------------------------------------------------------------

class ParseError(FanolabError):
    """Polynomial text could not be parsed into a rational germ."""


class NotAGermAtOrigin(FanolabError):
    """Caller demanded a vanishing germ but the constant term is nonzero."""


class DegenerateNewton(FanolabError):
    """Newton-polygon nondegeneracy certificate failed.

    Soft failure: carries the polygon value, which remains a valid upper
    bound, so the caller can fall back to the resolution engine.
    """

    def __init__(self, message, upper_bound=None, t0=None, polygon=None):
        super().__init__(message)
        self.upper_bound = upper_bound
        self.t0 = t0
        self.polygon = polygon


class IrrationalCenter(FanolabError):
    """Resolution needs to recenter at a non-rational point."""

    def __init__(self, message, candidates=(), factor=None):
        super().__init__(message)
        self.candidates = list(candidates)
        self.factor = factor


class NonTermination(FanolabError):
    """Blowup recursion exceeded the depth cap (implementation guard)."""


class InsufficientMultiplicity(FanolabError):
    """Blowup pullback requested with order above the germ multiplicity."""


class InconclusiveBracket(FanolabError):
    """Numeric integrability trends too flat to report a bracket."""


class UnsupportedSurface(FanolabError):
    """No certified alpha-invariant floor for the requested surface class."""


# -- criteria ---------------------------------------------------------------

class ThresholdUndefined(FanolabError):
    """Criterion threshold denominator is non-positive for these inputs."""


class InsufficientData(FanolabError):
    """Scan does not cover enough time windows for a drift verdict."""


# -- experiment / cli -------------------------------------------------------

class ConfigError(FanolabError):
    """Invalid experiment configuration; carries the offending field path."""

    def __init__(self, message, field=None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field
