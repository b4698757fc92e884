"""Exception types shared across the package."""


class UsageError(ValueError):
    """Bad input: wrong dimension, nonpositive weight, malformed file, ..."""


class PreconditionError(UsageError):
    """Input is well formed but violates an operation's precondition."""


class ModelBuildError(RuntimeError):
    """A model could not be constructed from the given data."""


class EvaluationError(ArithmeticError):
    """Numerical failure while evaluating a model."""

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition
