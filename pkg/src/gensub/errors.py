"""Exception types shared across the package."""


class ValidationError(ValueError):
    """An input violates a documented precondition or invariant."""


class ConsistencyError(ValidationError):
    """An embedding is not a right inverse of the pull-back it is paired with."""


class ClosureError(ValidationError):
    """An operator lies outside the span of a Lie-algebra basis, or the basis
    does not close under commutation."""


class ConvergenceError(RuntimeError):
    """An iterative solver did not reach its tolerance."""


class RankDeficiencyError(ConvergenceError):
    """A solver Jacobian is numerically rank deficient: the moment problem has
    no (unique) solution in the parameter family."""

    def __init__(self, message, direction=None):
        super().__init__(message)
        self.direction = direction


class DivergenceError(RuntimeError):
    """Numerical integration produced non-finite values."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t
