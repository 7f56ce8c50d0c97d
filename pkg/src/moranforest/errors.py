"""Exception hierarchy shared by every module of the package."""


class MoranForestError(Exception):
    """Base class for all errors raised by moranforest."""


class ValidationError(MoranForestError, ValueError):
    """Malformed or out-of-range input."""


class NotAForest(ValidationError):
    pass


class CycleDetected(NotAForest):
    pass


class MultipleParents(NotAForest):
    pass


class ParseError(ValidationError):
    pass


class InvalidStep(ValidationError):
    pass


class InvalidOffspring(ValidationError):
    pass


class InvalidN(ValidationError):
    pass


class RangeError(ValidationError):
    pass


class DomainError(ValidationError):
    pass


class TooLarge(ValidationError):
    """Exhaustive computation requested beyond its state-space guard."""


class BudgetExceeded(MoranForestError):
    """Lazy exploration needed more nodes than the configured budget."""


class SolverDegenerate(MoranForestError):
    """Exact linear solve hit a non-stochastic kernel or a rank defect."""


class IncompatibleReference(MoranForestError):
    """No exact reference law exists for the requested statistic."""


class TruncationWarning(UserWarning):
    pass
