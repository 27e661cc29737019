"""Exception types shared across the package."""


class DomainError(ValueError):
    """A parameter lies outside the domain an operation is defined on."""


class InvariantViolation(RuntimeError):
    """A numerical invariant that must hold by construction was broken."""


class ClosedFormInconsistency(ArithmeticError):
    """The closed-form density operator failed its trace safeguard."""

    def __init__(self, deviation: float, tau: float):
        self.deviation = deviation
        self.tau = tau
        super().__init__(
            f"closed-form trace deviates from 1 by {deviation:.3e} at tau={tau!r}"
        )


class SweepError(RuntimeError):
    """Failure at one point of a time sweep; carries the offending time."""

    def __init__(self, tau: float, cause: BaseException):
        self.tau = tau
        self.cause = cause
        super().__init__(f"at tau={tau!r}: {cause}")
