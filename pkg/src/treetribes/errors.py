"""Exception hierarchy shared by every module."""


class TreeTribesError(Exception):
    """Base class for all errors raised by this package."""


class UsageError(TreeTribesError, ValueError):
    """Bad arguments: mismatched lengths, unknown variables, malformed text."""


class DomainError(TreeTribesError, ValueError):
    """A numeric argument lies outside the domain where a formula is defined."""


class ResourceError(TreeTribesError):
    """A computation would exceed a configured size cap."""


class LiveCapExceeded(ResourceError):
    """A restricted tree still has more live variables than the cap allows."""

    def __init__(self, live, cap):
        super().__init__(f"{live} live variables exceed cap {cap}")
        self.live = live
        self.cap = cap


class InvariantViolation(TreeTribesError, RuntimeError):
    """Two independent computations that must agree did not."""
