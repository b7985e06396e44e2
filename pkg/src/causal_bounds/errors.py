"""Exception hierarchy shared by every module."""


class CausalBoundsError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(CausalBoundsError, ValueError):
    """An input failed one of the container invariants."""


class ShapeError(ValidationError):
    pass


class NegativeMass(ValidationError):
    pass


class MassMismatch(ValidationError):
    pass


class ZeroMarginal(ValidationError):
    def __init__(self, x: int, message: str | None = None):
        self.x = x
        super().__init__(message or f"observed marginal pi_x is zero at x={x}")


class MarginalMismatch(ValidationError):
    pass


class EmptySupport(ValidationError):
    pass


class DegenerateRow(ValidationError):
    def __init__(self, x: int):
        self.x = x
        super().__init__(f"latent joint row x={x} carries no mass")


class MembershipViolated(ValidationError):
    pass


class NotPerfectChannel(ValidationError):
    pass


class NumericalFailure(CausalBoundsError):
    """The LP engine could not reach a verified answer."""


class SolverFailure(CausalBoundsError):
    """An LP that must be feasible and bounded came back otherwise."""


class TooLarge(CausalBoundsError):
    def __init__(self, count: int, limit: int):
        self.count = count
        self.limit = limit
        super().__init__(f"{count} candidates exceeds the enumeration limit {limit}")
