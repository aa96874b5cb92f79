"""Package-wide exception types."""


class NumericalFailure(RuntimeError):
    """An algorithm produced non-finite values or failed to converge."""


class InvariantViolation(RuntimeError):
    """A verified internal identity or physical invariant did not hold."""
