"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Input violates a documented precondition or structural invariant."""


class BudgetExceeded(RuntimeError):
    """A combinatorial computation outgrew its resource budget.

    Carries enough context to report the run as inconclusive instead of
    silently truncating.  Distinct from a negative search result.
    """

    def __init__(self, message, *, count=None):
        super().__init__(message)
        self.count = count


class ConsistencyError(RuntimeError):
    """Certified bounds contradict each other (coindex above index)."""
