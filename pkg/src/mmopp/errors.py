"""Exception types shared across the toolkit."""


class ConvergenceError(RuntimeError):
    """A root search, scan, or iteration failed to converge."""


class BudgetError(RuntimeError):
    """An event-count or wall-time budget would be exceeded."""


class IntegrationError(RuntimeError):
    """A trajectory left the representable domain (blow-up, oversized step)."""
