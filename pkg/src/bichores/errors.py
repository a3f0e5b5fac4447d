"""Exception hierarchy shared by every module."""


class BichoresError(Exception):
    """Base class for all errors raised by this package."""


class InstanceError(BichoresError, ValueError):
    """Malformed instance input (bad JSON, shape, negative cost, ...)."""


class NotBivalued(InstanceError):
    """More than two distinct cost values appear in the cost matrix."""


class DegenerateAllZero(InstanceError):
    """Every cost is zero; any allocation is fair and efficient."""


class MalformedMarket(BichoresError):
    """A market precondition does not hold (e.g. a chore nobody has on mBB)."""


class InternalBoundViolation(BichoresError, RuntimeError):
    """A solver exceeded its polynomial step budget. Always a bug."""


class InvariantViolation(BichoresError, RuntimeError):
    """A runtime monitor for a proven invariant fired. Always a bug."""


class InsufficientSpend(BichoresError, RuntimeError):
    """Asked for a sub-bundle worth more than the bundle itself."""


class TooLarge(BichoresError):
    """Brute-force enumeration would exceed the configured cap."""


class ReplayDivergence(BichoresError):
    """A trace does not apply cleanly or does not reach the expected state."""
