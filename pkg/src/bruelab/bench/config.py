"""Experiment configuration: TOML file merged with command-line flags (flags win).

File grammar (every key optional)::

    seed = 1
    trials = 200
    jobs = 1
    out = "results.csv"
    algorithms = ["uct", "gct", "brue", "brue-per-alpha:0.9"]
    budgets = [128, 256, 512]            # or budget_exponents = [7, 15]

    [sailing]                            # any SailingConfig field
    grid_size = 5
    wind_persist_prob = 0.4

    [gametree]
    branching = 2
    depth = 10

    [sandbox]
    K = 2
    B = 2
    H = 3
    instance_seed = 27                   # omit for the built-in tiny instance
    sweeps = [1, 2, 4, 8]                # budgets in NaiveUniform sweeps
"""

from __future__ import annotations

import hashlib
import json
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any, Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from ..domains.gametree import GameTreeSpec
from ..domains.sailing import SailingConfig
from ..errors import ConfigError
from ..planners.config import as_planner
from ..planners.flat import flat_policy_count

DOMAINS = ("sailing", "gametree", "sandbox")


def powers_of_two(lo: int, hi: int) -> list[int]:
    return [2 ** e for e in range(lo, hi + 1)]


@dataclass
class SandboxSpec:
    K: int = 2
    B: int = 2
    H: int = 3
    instance_seed: Optional[int] = None   # None = the built-in tiny instance
    min_last_gap: float = 0.1
    sweeps: Optional[list] = None          # budgets as multiples of the flat-policy count


@dataclass
class ExperimentConfig:
    domain: str
    algorithms: list
    budgets: list
    trials: int = 1
    seed: int = 0
    out: Optional[str] = None
    jobs: int = 1
    sailing: Optional[SailingConfig] = None
    gametree: Optional[GameTreeSpec] = None
    sandbox: Optional[SandboxSpec] = None

    def validate(self) -> None:
        if self.domain not in DOMAINS:
            raise ConfigError(f"unknown domain {self.domain!r}")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        if not self.budgets:
            raise ConfigError("budget grid is empty")
        if any(b < 1 for b in self.budgets):
            raise ConfigError("budgets must be >= 1")
        if any(b2 <= b1 for b1, b2 in zip(self.budgets, self.budgets[1:])):
            raise ConfigError(f"budget grid must be strictly increasing, got {self.budgets}")
        if not self.algorithms:
            raise ConfigError("no algorithms given")
        for a in self.algorithms:
            as_planner(a)
        if len(set(self.algorithms)) != len(self.algorithms):
            raise ConfigError("duplicate algorithm entries")
        if self.domain == "sailing":
            if self.sailing is None:
                raise ConfigError("sailing domain needs a grid size")
            self.sailing.validate()
        if self.domain == "gametree":
            if self.gametree is None:
                raise ConfigError("game-tree domain needs branching and depth")
            self.gametree.validate()

    def resolved(self) -> dict:
        """Everything that determines the CSV content (output path and jobs excluded)."""
        d = {"domain": self.domain, "algorithms": [as_planner(a).label() for a in self.algorithms],
             "budgets": list(self.budgets), "trials": self.trials, "seed": self.seed}
        if self.sailing is not None:
            d["sailing"] = self.sailing.as_dict()
        if self.gametree is not None:
            d["gametree"] = {"branching": self.gametree.branching, "depth": self.gametree.depth}
        if self.sandbox is not None:
            d["sandbox"] = asdict(self.sandbox)
        return d

    def config_hash(self) -> str:
        text = json.dumps(self.resolved(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


def load_toml(path: Optional[str]) -> dict:
    if path is None:
        return {}
    try:
        with open(Path(path), "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file {path} not found") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config file {path}: {exc}") from None


def _pick(flag: Any, file: dict, key: str, default: Any = None) -> Any:
    return flag if flag is not None else file.get(key, default)


def _section(cls, raw: dict, name: str):
    known = {f.name for f in fields(cls)}
    extra = set(raw) - known
    if extra:
        raise ConfigError(f"unknown keys in [{name}]: {', '.join(sorted(extra))}")
    try:
        return cls(**raw)
    except TypeError as exc:
        raise ConfigError(f"[{name}]: {exc}") from None


def file_budgets(file: dict) -> Optional[list]:
    if "budgets" in file:
        return [int(b) for b in file["budgets"]]
    if "budget_exponents" in file:
        lo, hi = file["budget_exponents"]
        return powers_of_two(int(lo), int(hi))
    return None


def build_config(domain: str, file: dict, *, algorithms=None, budgets=None, trials=None, seed=None,
                 out=None, jobs=None, grid=None, branching=None, depth=None,
                 default_budgets: Optional[list] = None, default_algorithms: Optional[list] = None,
                 default_trials: int = 1) -> ExperimentConfig:
    sailing = gametree = sandbox = None
    if domain == "sailing":
        raw = dict(file.get("sailing", {}))
        if grid is not None:
            raw["grid_size"] = grid
        if "grid_size" in raw:
            if "move_cost_by_relative_angle" in raw:
                raw["move_cost_by_relative_angle"] = tuple(raw["move_cost_by_relative_angle"])
            if raw.get("goal") is not None:
                raw["goal"] = tuple(raw["goal"])
            sailing = _section(SailingConfig, raw, "sailing")
    elif domain == "gametree":
        raw = dict(file.get("gametree", {}))
        if branching is not None:
            raw["branching"] = branching
        if depth is not None:
            raw["depth"] = depth
        if "branching" in raw and "depth" in raw:
            gametree = GameTreeSpec(int(raw["branching"]), int(raw["depth"]))
    elif domain == "sandbox":
        sandbox = _section(SandboxSpec, dict(file.get("sandbox", {})), "sandbox")
    if domain == "sandbox" and budgets is None and file_budgets(file) is None:
        count = flat_policy_count(sandbox.K, sandbox.B, sandbox.H)
        default_budgets = [s * count for s in (sandbox.sweeps or range(1, 9))]
    cfg = ExperimentConfig(
        domain=domain,
        algorithms=list(_pick(algorithms, file, "algorithms", default_algorithms) or []),
        budgets=list(budgets if budgets is not None else (file_budgets(file) or default_budgets or [])),
        trials=int(_pick(trials, file, "trials", default_trials)),
        seed=int(_pick(seed, file, "seed", 0)),
        out=_pick(out, file, "out"),
        jobs=int(_pick(jobs, file, "jobs", 1)),
        sailing=sailing, gametree=gametree, sandbox=sandbox)
    cfg.validate()
    return cfg
