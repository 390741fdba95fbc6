"""
Ramiforge - Error Types
Domain errors raised by the services and mapped to exit codes by the CLI.
"""


class RamiforgeError(ValueError):
    """Root of every error the library raises on purpose."""

    exit_code = 2

    def __init__(self, message: str, detail: str = None):
        super().__init__(message)
        self.detail = detail


class InputError(RamiforgeError):
    """Malformed cover file, recipe file, CLI argument or request."""


class PreconditionError(RamiforgeError):
    """An operation was called outside its documented domain."""

    def __init__(self, operation: str, message: str, detail: str = None):
        super().__init__(f"{operation}: {message}", detail)
        self.operation = operation


class BadPrimeError(PreconditionError):
    """A computation hit a prime that is bad for the cover."""


class GroupTooLargeError(PreconditionError):
    """Element enumeration exceeded the configured group order limit."""


class SpecializationError(PreconditionError):
    """The specialized defining polynomial is not separable."""


class SearchExhaustedError(RamiforgeError):
    """A residue search ran out of candidates."""


class InternalConsistencyError(RamiforgeError):
    """Two independent computations of the same quantity disagree."""

    exit_code = 1
