"""Exception types shared across the package."""


class InputError(ValueError):
    """Raised when user-supplied data, files or options are invalid."""


class InternalError(RuntimeError):
    """Raised when a produced result violates an invariant the library guarantees."""
