"""Exception types shared across the package."""


class PboxError(Exception):
    """Base class for all package-specific errors."""


class EmptyInput(PboxError):
    pass


class WeightSumViolation(PboxError):
    pass


class UnsupportedFamily(PboxError):
    pass


class InvalidCdfParameter(PboxError):
    pass


class UnboundedPBox(PboxError):
    pass


class DimensionMismatch(PboxError):
    pass


class Underdetermined(PboxError):
    pass


class DegenerateResponses(PboxError):
    pass


class ZeroVariance(PboxError):
    pass


class NonPositiveParameter(PboxError):
    pass


class SingularStiffness(PboxError):
    pass


class NonFiniteModelOutput(PboxError):
    pass


class FactorialCapExceeded(PboxError):
    pass


class OutOfSupport(PboxError):
    pass


class ConfigError(PboxError):
    pass


class ProcessFailure(PboxError):
    pass


class ParseFailure(PboxError):
    pass


class RankDeficientWarning(UserWarning):
    """Least-squares system is rank deficient; minimum-norm solution returned."""


class FirstLevelAccuracyWarning(UserWarning):
    """First-level surrogate generalization error exceeds the configured threshold."""


class BudgetExhaustedWarning(UserWarning):
    """Optimizer stopped on its evaluation budget before reaching tolerance."""
