"""Exception hierarchy shared by all copair modules.

Every error carries an ``exit_code`` so the command line front end can map
failures onto stable process exit statuses without inspecting messages.
"""


class CopairError(Exception):
    """Base class for all library errors."""

    exit_code = 5


class DataError(CopairError):
    exit_code = 2


class ConfigError(CopairError, ValueError):
    exit_code = 3


class ModelError(CopairError):
    exit_code = 4


# market data
class ParseError(DataError):
    def __init__(self, path, line, message):
        self.path = str(path)
        self.line = line
        super().__init__(f"{self.path}:{line}: {message}")


class MissingReference(DataError):
    pass


class EmptyIntersection(DataError):
    pass


class PanelTooShort(DataError):
    pass


class OutOfRange(DataError):
    pass


class UnknownSymbol(DataError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


# unit root
class DegenerateRegressor(ModelError, ValueError):
    pass


class TooShort(ModelError, ValueError):
    pass


class SingularDesign(ModelError):
    pass


class UnsupportedTest(ConfigError):
    pass


class NonFiniteSpread(ModelError):
    pass


# dependence
class LengthMismatch(ModelError, ValueError):
    pass


class NonFinite(ModelError, ValueError):
    pass


# copula
class InadmissibleParams(ModelError, ValueError):
    pass


class DomainError(ModelError, ValueError):
    pass


class InvalidRotation(ConfigError):
    pass


class FitFailed(ModelError):
    pass


class AllFitsFailed(FitFailed):
    pass


# strategy
class NoSpreadPassed(ModelError):
    pass


class EmptyCandidates(ModelError):
    pass


class DegenerateBeta(ModelError):
    pass


# backtest
class NonPositiveEquity(ModelError):
    pass


class EmptyInput(ModelError, ValueError):
    pass
