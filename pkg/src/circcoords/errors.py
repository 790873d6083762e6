"""Exception hierarchy shared by every stage of the pipeline."""


class CircCoordsError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(CircCoordsError, ValueError):
    pass


class FormatError(CircCoordsError, ValueError):
    pass


class SamplingError(CircCoordsError, RuntimeError):
    pass


class SizeError(CircCoordsError, MemoryError):
    pass


class LiftError(CircCoordsError, ArithmeticError):
    """An integer lift of a mod-p cocycle is not a cocycle over Z."""

    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)


class DivergenceError(CircCoordsError, FloatingPointError):
    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class UnsupportedConfigError(CircCoordsError, NotImplementedError):
    pass


class ObstructionError(CircCoordsError):
    """No significant 1-cocycle: circle-valued coordinates do not exist."""
