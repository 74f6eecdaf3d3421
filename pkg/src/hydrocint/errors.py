"""Exception types shared across the toolkit."""


class HydrocintError(Exception):
    """Base class for all toolkit errors."""


class DimensionMismatch(HydrocintError):
    """Fields live on incompatible grids or have incompatible ranks."""


class NonZeroMean(HydrocintError):
    """An operator precondition on a vanishing mean was violated."""


class NonZeroZMean(NonZeroMean):
    """The vertical mean of a field does not vanish."""


class ResolutionExceeded(HydrocintError):
    """A requested concentration/oscillation does not fit on the grid.

    Raised hard, never downgraded to silent truncation: aliasing would
    silently corrupt every scaling measurement downstream.
    """


class UnderResolvedTime(HydrocintError):
    """A time quadrature cannot resolve the fastest temporal frequency."""


class ZeroStress(HydrocintError):
    """The horizontal stress vanishes; the horizontal perturbation must be skipped."""


class MeanMismatch(HydrocintError):
    """Two base solutions to be glued carry different momentum means."""


class OutOfBall(HydrocintError):
    """Matrix argument left the operating ball of the geometric coefficients."""


class InfeasibleExponents(HydrocintError):
    """An admissible exponent interval came out empty (constraint bug upstream)."""


class UnregisteredDerivative(HydrocintError):
    """A pointwise map node was differentiated without a registered derivative."""
