"""Exception hierarchy shared by every anlab module."""


class AnlabError(Exception):
    """Base class for all errors raised by anlab."""


class DomainError(AnlabError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ValidationError(AnlabError, ValueError):
    """An input object violates a documented invariant."""


class DegenerateCorrelationError(ValidationError):
    """The correlation matrix is singular or numerically rank deficient."""


class DegenerateChannelError(ValidationError):
    """The main channel is zero or has no null space to carry artificial noise."""


class SeriesDivergenceError(AnlabError, ArithmeticError):
    """A truncated series produced a value outside the admissible range."""


class NumericError(AnlabError, ArithmeticError):
    """A special function returned a non-finite value."""


class BudgetError(AnlabError, ValueError):
    """The Monte Carlo budget is too small for the requested estimate."""


class UnsupportedDimensionError(AnlabError, ValueError):
    """The antenna count exceeds what the numerical search supports."""


class ScenarioError(ValidationError):
    """A scenario file failed to parse or validate.

    ``line`` is the 1-based line of the offending entry when it can be located.
    """

    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where = f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)
