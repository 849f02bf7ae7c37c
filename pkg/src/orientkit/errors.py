"""Exception types shared across the toolkit."""


class OrientkitError(Exception):
    """Base class for all orientkit errors."""


class ValidationError(OrientkitError, ValueError):
    """Raised when an input violates a documented precondition."""


class InsufficientDataError(OrientkitError):
    """Raised when too few records are available to produce a result."""


class UnknownTargetError(OrientkitError, KeyError):
    """Raised when a decision or query references a nonexistent asset or category."""
