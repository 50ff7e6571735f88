"""Exception types shared across the package."""


class ParameterError(ValueError):
    """A parameter fails a precondition (dimension, probability range, ...)."""


class ConstraintViolation(ValueError):
    """A control action was applied to a state that does not admit it."""


class WorkLimitExceeded(RuntimeError):
    """A computation was refused because its estimated work exceeds the guard."""

    def __init__(self, message: str, estimated_work: int, limit: int):
        super().__init__(message)
        self.estimated_work = estimated_work
        self.limit = limit
