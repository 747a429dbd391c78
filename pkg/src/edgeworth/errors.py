"""Exception hierarchy shared by every module of the package."""


class EdgeworthError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(EdgeworthError, ValueError):
    """Invalid model, statistic or experiment configuration."""


class UnsupportedDegreeError(ConfigError):
    """A raw moment above the configured degree ceiling was requested."""


class InsufficientDataError(EdgeworthError, ValueError):
    pass


class NumericalError(EdgeworthError, ArithmeticError):
    """A computation produced a result the expansion cannot use."""


class DegenerateStatisticError(NumericalError):
    """The statistic has zero limiting variance or is undefined at the mean."""


class SimulationError(NumericalError):
    pass


class UnsupportedConditioningError(EdgeworthError):
    """Conditioning coordinates do not determine their base variables."""


class ExpressionError(ConfigError):
    """Base class for expression parsing failures.

    ``offset`` is the 0-based character position the error refers to.
    """

    def __init__(self, message, offset=None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (at offset {offset})"
        super().__init__(message)


class ExpressionSyntaxError(ExpressionError):
    pass


class UnknownVariableError(ExpressionError):
    pass
