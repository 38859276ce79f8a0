"""Exception hierarchy shared by all halfdirac modules."""


class HalfDiracError(Exception):
    """Base class for all errors raised by this package."""


class PreconditionError(HalfDiracError, ValueError):
    """An operation was called outside its admissible parameter range."""


class NumericalError(HalfDiracError, RuntimeError):
    """A numerical procedure failed to converge or became ill-conditioned."""


class EmbeddedPoint(PreconditionError):
    """Spectral parameter lies on (or too close to) the free spectrum."""


class MasslessUndefined(PreconditionError):
    pass


class PoleAtZetaSquaredOne(PreconditionError):
    pass


class RhoNotGreaterThanOne(PreconditionError):
    pass


class CouplingTooLarge(PreconditionError):
    pass


class TangentUndefined(PreconditionError):
    pass


class DegenerateDenominator(PreconditionError):
    pass


class UnsupportedBoundaryCondition(PreconditionError):
    pass


class RegionTouchesSpectrum(PreconditionError):
    pass


class OnHalfLineSpectrum(PreconditionError):
    pass


class WronskianVanishes(NumericalError):
    pass


class DegenerateBasis(NumericalError):
    pass


class StiffnessFailure(NumericalError):
    def __init__(self, message, location=None):
        super().__init__(message)
        self.location = location


class ContourThroughZero(NumericalError):
    pass


class NonConvergence(NumericalError):
    pass


class NewtonDivergence(NonConvergence):
    pass
