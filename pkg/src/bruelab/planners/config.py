"""Planner configuration and its string form (``brue-alpha:0.9``, ``uct:c=auto``)."""

from __future__ import annotations

from dataclasses import asdict, dataclass, replace
from typing import Optional, Union

from ..errors import ConfigError

MCTS_ALGORITHMS = ("uct", "gct", "brue", "brue-alpha", "brue-per", "brue-per-alpha")
FLAT_ALGORITHMS = ("naive", "crafty")
ALGORITHMS = MCTS_ALGORITHMS + FLAT_ALGORITHMS

# positional argument of each name, if any
_POSITIONAL = {"gct": "epsilon", "brue-alpha": "alpha", "brue-per-alpha": "alpha", "uct": "c"}
_KEY_ALIASES = {"c": "c", "eps": "epsilon", "epsilon": "epsilon", "alpha": "alpha",
                "keying": "keying", "recommend": "recommend"}


@dataclass(frozen=True)
class PlannerConfig:
    algorithm: str = "brue"
    c: Union[str, float] = "auto"     # "auto" = empirical best value at the node
    epsilon: float = 0.5              # gct only
    alpha: float = 1.0                # brue family
    keying: Optional[str] = None      # "dag" | "tree"; None = domain default
    recommend: str = "q"              # "q" | "visits"

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}; expected one of {', '.join(ALGORITHMS)}")
        if not 0.0 < self.alpha <= 1.0:
            raise ConfigError(f"alpha must lie in (0, 1], got {self.alpha}")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ConfigError(f"epsilon must lie in [0, 1], got {self.epsilon}")
        if self.c != "auto" and not (isinstance(self.c, (int, float)) and self.c >= 0):
            raise ConfigError(f"c must be 'auto' or a nonnegative number, got {self.c!r}")
        if self.keying not in (None, "dag", "tree"):
            raise ConfigError(f"keying must be 'dag' or 'tree', got {self.keying!r}")
        if self.recommend not in ("q", "visits"):
            raise ConfigError(f"recommend must be 'q' or 'visits', got {self.recommend!r}")
        if self.algorithm in ("brue", "brue-per") and self.alpha != 1.0:
            raise ConfigError(f"{self.algorithm} has alpha fixed at 1; use {self.algorithm}-alpha")

    @property
    def family(self) -> str:
        if self.algorithm in ("uct", "gct"):
            return "uct"
        if self.algorithm in FLAT_ALGORITHMS:
            return "flat"
        return "brue"

    @property
    def permissive(self) -> bool:
        return self.algorithm in ("brue-per", "brue-per-alpha")

    def label(self) -> str:
        """Canonical short name used in CSV output."""
        if self.algorithm in ("brue-alpha", "brue-per-alpha"):
            return f"{self.algorithm}:{self.alpha:g}"
        if self.algorithm == "gct" and self.epsilon != 0.5:
            return f"gct:{self.epsilon:g}"
        if self.algorithm == "uct" and self.c != "auto":
            return f"uct:c={self.c:g}"
        return self.algorithm

    def as_dict(self) -> dict:
        return asdict(self)

    def with_keying(self, keying: str) -> "PlannerConfig":
        return replace(self, keying=keying)


def _coerce(key: str, raw: str):
    if key in ("keying", "recommend"):
        return raw
    if key == "c" and raw == "auto":
        return raw
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{key} expects a number, got {raw!r}") from None


def parse_planner(text: str) -> PlannerConfig:
    """Parse ``name[:positional][:key=value...]``.

    >>> parse_planner("brue-alpha:0.9").alpha
    0.9
    """
    parts = [p.strip() for p in text.strip().split(":") if p.strip()]
    if not parts:
        raise ConfigError("empty planner spec")
    name, rest = parts[0].lower(), parts[1:]
    fields: dict = {"algorithm": name}
    for i, item in enumerate(rest):
        if "=" in item:
            key, raw = item.split("=", 1)
            key = key.strip().lower()
            if key not in _KEY_ALIASES:
                raise ConfigError(f"unknown planner option {key!r} in {text!r}")
            field = _KEY_ALIASES[key]
            fields[field] = _coerce(field, raw.strip())
        elif i == 0 and name in _POSITIONAL:
            field = _POSITIONAL[name]
            fields[field] = _coerce(field, item)
        else:
            raise ConfigError(f"unexpected argument {item!r} in planner spec {text!r}")
    if name in ("brue-alpha", "brue-per-alpha") and "alpha" not in fields:
        raise ConfigError(f"{name} needs an alpha, e.g. {name}:0.9")
    return PlannerConfig(**fields)


def as_planner(spec: Union[str, PlannerConfig]) -> PlannerConfig:
    return spec if isinstance(spec, PlannerConfig) else parse_planner(spec)
