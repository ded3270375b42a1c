"""Exception types shared across the package."""


class BrueLabError(Exception):
    pass


class ContractViolation(BrueLabError):
    """A caller broke an operation's precondition (e.g. inapplicable action)."""


class CapabilityError(BrueLabError):
    """The MDP lacks a capability the operation needs (e.g. enumeration)."""


class ResourceCapError(BrueLabError):
    """A configured size cap would be exceeded."""

    def __init__(self, what: str, count: int | float, cap: int | float):
        super().__init__(f"{what}: {count} exceeds cap {cap}")
        self.what = what
        self.count = count
        self.cap = cap


class MissingOracleEntry(BrueLabError, KeyError):
    def __str__(self) -> str:  # KeyError quotes its message otherwise
        return str(self.args[0]) if self.args else "missing oracle entry"


class DegenerateInstanceError(BrueLabError, ValueError):
    """Bound constants requested for an instance with d = 0."""


class InsufficientBudgetError(BrueLabError):
    """No root action was ever evaluated, so nothing can be recommended."""


class ConfigError(BrueLabError, ValueError):
    pass
