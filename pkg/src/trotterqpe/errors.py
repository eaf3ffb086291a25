"""Exception types shared across the package."""


class InvalidArgumentError(ValueError):
    """An argument is outside the domain an operation accepts."""


class ResourceLimitError(RuntimeError):
    """A dense or statevector size guard would be exceeded."""


class InvariantViolationError(RuntimeError):
    """An internal consistency check failed (e.g. a non-Hermitian matrix)."""


class PhaseWrapError(InvalidArgumentError):
    """The ground-state phase would alias past one full turn."""
