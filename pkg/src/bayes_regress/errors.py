"""Exception hierarchy shared by every module of the package."""


class BayesRegressError(Exception):
    """Base class for all errors raised by bayes_regress."""


class DomainError(BayesRegressError, ValueError):
    """A parameter or observation lies outside its declared support."""


class UsageError(BayesRegressError, ValueError):
    """An operation was called with arguments that violate its contract."""


class NumericalFailure(BayesRegressError, ArithmeticError):
    """An estimator could not produce a finite value for this input."""


class DegeneratePosteriorError(NumericalFailure):
    """Every grid node has zero likelihood for the conditioning data."""


class NoPredictiveMassError(NumericalFailure):
    """The evaluation point has vanishing predictive density at every node."""


class NoMassError(NumericalFailure):
    """Kernel weights underflowed for a Nadaraya-Watson evaluation."""


class ExperimentError(BayesRegressError):
    """A Monte Carlo experiment failed as a whole (e.g. too many fallbacks)."""


class ConfigError(BayesRegressError):
    """Invalid experiment configuration; ``field`` names the offending key."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
        self.message = message
