"""Exception types shared across the package."""


class NumericOverflowError(ArithmeticError):
    """An objective evaluation produced a non-finite value."""


class GrowthViolationError(ValueError):
    """The full gradient vanishes while some component gradient does not."""


class NumericFailureError(RuntimeError):
    """An iterative numerical routine failed to converge."""


class DivergenceError(ArithmeticError):
    """An optimizer run produced a non-finite iterate or value."""

    def __init__(self, method, iteration, message=None, partial=None):
        self.method = method
        self.iteration = iteration
        self.partial = partial
        super().__init__(message or f"{method} diverged at iteration {iteration}")


class WindowViolationError(ValueError):
    """Step size lies outside 0 < alpha < 2 / (L B^2)."""


class InsufficientDataError(ValueError):
    """Too few usable points for a rate fit."""
