"""Exception hierarchy shared by all kerrcat modules."""


class KerrCatError(Exception):
    """Base class for every error raised by this package."""


class InvalidDimensionError(KerrCatError, ValueError):
    pass


class ZeroVectorError(KerrCatError, ValueError):
    pass


class NonHermitianError(KerrCatError, ValueError):
    pass


class SingularInputError(KerrCatError, ValueError):
    pass


class InvalidRegimeError(KerrCatError, ValueError):
    pass


class DomainError(KerrCatError, ValueError):
    pass


class NumericFailure(KerrCatError, RuntimeError):
    pass


class CodespaceError(KerrCatError, RuntimeError):
    """The stabilized ground doublet is not separated from the rest of the spectrum."""


class IntegratorError(NumericFailure):
    pass


class FitError(NumericFailure):
    """A least-squares fit did not converge.

    The residual vector at the last iterate is kept on ``residuals``.
    """

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


class FitRejectedError(FitError):
    pass


class AmbiguousLogError(KerrCatError, ValueError):
    pass


class ModelError(KerrCatError, ValueError):
    pass


class GramSingularError(KerrCatError, RuntimeError):
    pass


class CalibrationError(KerrCatError, ValueError):
    pass
