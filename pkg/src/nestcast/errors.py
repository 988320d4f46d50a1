"""Exception types shared across the package."""


class NestcastError(Exception):
    """Base class for all package errors."""


class ModelValidationError(NestcastError):
    """A model file or raw model dict violates an invariant.

    ``path`` names the offending field, e.g. ``channel.inner[1]``.
    """

    def __init__(self, message, path=None):
        self.path = path
        if path is not None:
            message = f"{message} at {path}"
        super().__init__(message)


class CapExceeded(NestcastError):
    """An enumeration would exceed a configured size cap."""

    def __init__(self, what, count, cap):
        self.what = what
        self.count = count
        self.cap = cap
        super().__init__(f"{what}: {count} exceeds cap {cap}")


class ZeroProbabilityObservation(NestcastError):
    """Conditioning on an observation that has probability zero."""


class UnknownAtom(NestcastError):
    """A partial encoder lacks a rule for a belief atom in the support."""
