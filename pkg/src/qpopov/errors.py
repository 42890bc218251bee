"""Exception hierarchy shared by the analysis modules."""


class QPopovError(Exception):
    """Base class for all errors raised by this package."""


class InvalidDimensionError(QPopovError, ValueError):
    pass


class PlantValidationError(QPopovError, ValueError):
    """Raised when a plant document or matrix violates a model invariant.

    ``path`` names the offending field (e.g. ``"M1[0][1]"`` or ``"gamma"``).
    """

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")


class NumericFailure(QPopovError, ArithmeticError):
    pass


class SingularMatrixError(NumericFailure):
    def __init__(self, message, condition=float("inf")):
        self.condition = condition
        super().__init__(f"{message} (condition estimate {condition:.3e})")


class NoSolutionError(NumericFailure):
    pass


class RiccatiInfeasibleError(NumericFailure):
    pass


class CertificateInfeasibleError(QPopovError):
    """No valid Lyapunov certificate was found on the whole eps ladder."""

    def __init__(self, message, attempts=()):
        self.attempts = list(attempts)
        super().__init__(message)


class InfeasibleGammaError(QPopovError):
    pass
