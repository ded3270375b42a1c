"""Simple-regret Monte-Carlo tree search planners, exact oracles and benchmarks."""

from .errors import (BrueLabError, CapabilityError, ConfigError, ContractViolation,
                     DegenerateInstanceError, InsufficientBudgetError, MissingOracleEntry,
                     ResourceCapError)
from .rng import RngStream

__all__ = [
    "BrueLabError", "CapabilityError", "ConfigError", "ContractViolation", "DegenerateInstanceError",
    "InsufficientBudgetError", "MissingOracleEntry", "ResourceCapError", "RngStream",
]
