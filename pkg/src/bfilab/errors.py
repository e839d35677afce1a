"""Exception hierarchy shared by all bfilab modules."""


class BfiLabError(Exception):
    """Base class for library errors."""


class DomainError(BfiLabError, ValueError):
    """An argument lies outside the domain of the operation."""


class ResourceError(BfiLabError):
    """A request exceeds the configured sieve or memory budget."""


class InvariantError(BfiLabError):
    """An internal consistency check failed.

    ``invariant`` names the check so callers (the CLI in particular) can
    report it in machine-readable form.
    """

    def __init__(self, invariant: str, detail: str = ""):
        self.invariant = invariant
        self.detail = detail
        super().__init__(f"{invariant}: {detail}" if detail else invariant)
