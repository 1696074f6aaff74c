"""Exception hierarchy shared by all modules."""


class GPPTestError(Exception):
    """Base class for errors raised by this package."""


class DomainError(GPPTestError, ValueError):
    """An argument lies outside the domain of a function."""


class ConvergenceError(GPPTestError, ArithmeticError):
    """Adaptive quadrature gave up before reaching the requested tolerance.

    The best available estimate is kept in ``estimate``.
    """

    def __init__(self, message, estimate):
        super().__init__(message)
        self.estimate = estimate


class ModelError(GPPTestError, ValueError):
    """A generator or W-model violates its defining constraints."""


class ConfigError(GPPTestError, ValueError):
    """Invalid experiment configuration; ``path`` names the offending key."""

    def __init__(self, message, path=""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


class ParameterError(GPPTestError, ValueError):
    """A derived model parameter (e.g. a local alternative) is not admissible."""


class NoExceedanceError(GPPTestError):
    """A statistic needs at least one exceedance but the sample has none."""


class LikelihoodError(GPPTestError, ArithmeticError):
    """Exceedance density is not strictly positive at an observed value."""


class InsufficientDataError(GPPTestError):
    """Too few usable replications to compute a Monte Carlo summary."""
