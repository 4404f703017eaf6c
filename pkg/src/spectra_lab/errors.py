"""Exception hierarchy shared by every spectra_lab module."""


class SpectraError(Exception):
    """Base class for all library errors."""


class NonFiniteInput(SpectraError, ValueError):
    pass


class DimensionMismatch(SpectraError, ValueError):
    pass


class ShapeMismatch(DimensionMismatch):
    """Parameter, gradient and state buffers disagree in shape."""


class ConvergenceFailure(SpectraError, ArithmeticError):
    pass


class RankDeficient(SpectraError, ArithmeticError):
    pass


class NotPositiveDefinite(SpectraError, ArithmeticError):
    pass


class DivergedIteration(SpectraError, ArithmeticError):
    pass


class OutOfRange(SpectraError, ValueError):
    pass


class ZeroGradient(SpectraError, ValueError):
    pass


class HypothesisViolated(SpectraError, ValueError):
    """A Monte-Carlo instance does not satisfy the preconditions of the bound it checks."""


class ConfigError(SpectraError, ValueError):
    pass


class ParseError(ConfigError):
    """Config document is malformed; ``field`` and ``line`` locate the problem when known."""

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        where = []
        if field is not None:
            where.append(f"field {field!r}")
        if line is not None:
            where.append(f"line {line}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
