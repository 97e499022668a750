"""Exception types shared across the package."""


class ShapeError(ValueError):
    """Kernels or chaos elements that cannot be combined (grid/order/flavor)."""


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


class InconsistencyError(RuntimeError):
    """An internal invariant was violated; indicates a bug, not bad input."""


class ResourceLimitError(RuntimeError):
    """A computation was refused because its estimated cost exceeds a cap."""

    def __init__(self, message, cost=None):
        super().__init__(message)
        self.cost = cost or {}
