"""Stochastic sailing on an n x n, 8-connected grid.

State = (x, y, wind, tack), packed into a dense int.  ``wind`` is the compass
direction the wind blows *towards* (0 = N, clockwise), so moving along ``wind``
is sailing with a tail wind.  For a move in direction ``m`` the relative angle
is ``r = (m - wind) mod 8``; ``r == 4`` is straight into the wind and is not
applicable.  ``r`` in 1..3 puts the boat on port tack, 5..7 on starboard,
``r == 0`` on neither.

Move duration = ``cost_by_angle[r] * (sqrt(2) if diagonal)`` plus
``tack_change_penalty`` when switching between port and starboard.  After each
move the wind keeps its direction or rotates 45 degrees either way.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional

from ..errors import ConfigError, ContractViolation
from ..mdp import EnumerableMdp
from ..tabular import TabularModel, compile_tabular

# (dx, dy) for N, NE, E, SE, S, SW, W, NW
DIRECTIONS = ((0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1), (-1, 0), (-1, 1))
TACK_NONE, TACK_PORT, TACK_STARBOARD = 0, 1, 2
ANGLE_SLOTS = (0, 1, 2, 3, 5, 6, 7)  # relative angles with a cost entry


@dataclass(frozen=True)
class SailingConfig:
    grid_size: int = 5
    goal: Optional[tuple[int, int]] = None   # default: (n-1, n-1)
    wind_persist_prob: float = 0.4
    wind_rotate_prob: float = 0.3
    # durations for relative angles 0,1,2,3,5,6,7 (tail, broad, beam, close, close, beam, broad)
    move_cost_by_relative_angle: tuple[float, ...] = (1.0, 2.0, 3.0, 4.0, 4.0, 3.0, 2.0)
    tack_change_penalty: float = 3.0
    diagonal_factor: float = math.sqrt(2.0)

    def resolved_goal(self) -> tuple[int, int]:
        if self.goal is None:
            return (self.grid_size - 1, self.grid_size - 1)
        return (int(self.goal[0]), int(self.goal[1]))

    def validate(self) -> None:
        n = self.grid_size
        if n < 2:
            raise ConfigError("sailing grid_size must be >= 2")
        gx, gy = self.resolved_goal()
        if not (0 <= gx < n and 0 <= gy < n):
            raise ConfigError(f"goal {(gx, gy)} outside a {n}x{n} grid")
        if self.wind_persist_prob < 0 or self.wind_rotate_prob < 0:
            raise ConfigError("wind probabilities must be nonnegative")
        if abs(self.wind_persist_prob + 2 * self.wind_rotate_prob - 1.0) > 1e-12:
            raise ConfigError("wind_persist_prob + 2*wind_rotate_prob must equal 1")
        if len(self.move_cost_by_relative_angle) != 7:
            raise ConfigError("move_cost_by_relative_angle needs 7 entries")
        if any(c <= 0 for c in self.move_cost_by_relative_angle):
            raise ConfigError("move costs must be positive")
        if self.tack_change_penalty < 0 or self.diagonal_factor <= 0:
            raise ConfigError("tack penalty must be >= 0 and diagonal factor > 0")

    def as_dict(self) -> dict:
        d = asdict(self)
        d["goal"] = list(self.resolved_goal())
        d["move_cost_by_relative_angle"] = list(self.move_cost_by_relative_angle)
        return d


class SailingMdp(EnumerableMdp):
    name = "sailing"
    default_keying = "dag"

    def __init__(self, config: SailingConfig):
        config.validate()
        self.config = config
        self.n = config.grid_size
        self.goal = config.resolved_goal()
        self.horizon = 4 * self.n
        self.num_states = self.n * self.n * 8 * 3
        self._cost = {r: c for r, c in zip(ANGLE_SLOTS, config.move_cost_by_relative_angle)}
        worst = max(config.move_cost_by_relative_angle) * max(1.0, config.diagonal_factor)
        self.reward_range = (-(worst + config.tack_change_penalty), 0.0)
        self._actions = [self._compute_actions(s) for s in range(self.num_states)]

    # --- state packing

    def encode(self, x: int, y: int, wind: int, tack: int) -> int:
        return ((y * self.n + x) * 8 + wind) * 3 + tack

    def decode(self, s: int) -> tuple[int, int, int, int]:
        s, tack = divmod(int(s), 3)
        s, wind = divmod(s, 8)
        y, x = divmod(s, self.n)
        return x, y, wind, tack

    def _compute_actions(self, s: int) -> tuple[int, ...]:
        x, y, wind, _ = self.decode(s)
        if (x, y) == self.goal:
            return ()
        dirs = []
        for m, (dx, dy) in enumerate(DIRECTIONS):
            if (m - wind) % 8 == 4:
                continue
            if 0 <= x + dx < self.n and 0 <= y + dy < self.n:
                dirs.append(m)
        return tuple(dirs)

    # --- contract

    def applicable_actions(self, s):
        return range(len(self._actions[s]))

    def is_terminal(self, s) -> bool:
        return not self._actions[s]

    def direction_of(self, s: int, a: int) -> int:
        """Compass direction of local action ``a`` at state ``s``."""
        return self._actions[s][a]

    def move_reward(self, s: int, a: int) -> tuple[int, int, int, float]:
        """(new_x, new_y, new_tack, reward) for the boat's move, before wind."""
        x, y, wind, tack = self.decode(s)
        m = self._actions[s][a]
        r = (m - wind) % 8
        new_tack = TACK_NONE if r == 0 else (TACK_PORT if r < 4 else TACK_STARBOARD)
        duration = self._cost[r]
        if m % 2 == 1:
            duration *= self.config.diagonal_factor
        if {tack, new_tack} == {TACK_PORT, TACK_STARBOARD}:
            duration += self.config.tack_change_penalty
        dx, dy = DIRECTIONS[m]
        return x + dx, y + dy, new_tack, -duration

    def enumerate_outcomes(self, s, a):
        acts = self._actions[s]
        if not 0 <= a < len(acts):
            raise ContractViolation(f"action {a} not applicable at sailing state {s}")
        nx, ny, new_tack, reward = self.move_reward(s, a)
        wind = self.decode(s)[2]
        cfg = self.config
        out = []
        for shift, p in ((0, cfg.wind_persist_prob), (1, cfg.wind_rotate_prob),
                         (-1, cfg.wind_rotate_prob)):
            if p > 0:
                out.append((self.encode(nx, ny, (wind + shift) % 8, new_tack), p, reward))
        return out

    def start_states(self) -> list[int]:
        return [s for s in range(self.num_states) if self._actions[s]]

    def to_tabular(self) -> TabularModel:
        # all states as starts keeps index == StateId
        model = compile_tabular(self, start_states=list(range(self.num_states)))
        model.index = None
        return model

    def config_dict(self) -> dict:
        return {"name": self.name, "horizon": self.horizon, **self.config.as_dict()}


def sailing_mdp(config: SailingConfig) -> SailingMdp:
    return SailingMdp(config)
