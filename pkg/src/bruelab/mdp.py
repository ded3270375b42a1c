"""Generative MDP contract, trajectories and the simple-regret vocabulary.

States are opaque hashable handles (every domain here uses ints).  Actions are
local indices ``0..k-1`` into the applicable-action list of a state.  Rewards
are always maximised; cost domains publish ``reward = -cost``.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable, Hashable, Optional, Sequence

from .errors import CapabilityError, ContractViolation
from .rng import RngStream

StateId = Hashable
ActionId = int
Outcome = tuple  # (next_state, probability, reward)


def sample_from_outcomes(outcomes: Sequence[Outcome], rng: RngStream) -> tuple[StateId, float]:
    """Draw one outcome by inverse CDF over the listed order.

    Consumes one uniform draw unless there is a single outcome.  The compiled
    planners walk the same cumulative sums, so both routes stay in lockstep.
    """
    if len(outcomes) == 1:
        s2, _, r = outcomes[0]
        return s2, r
    u = rng.random()
    acc = 0.0
    for s2, p, r in outcomes:
        acc += p
        if u < acc:
            return s2, r
    s2, _, r = outcomes[-1]
    return s2, r


class GenerativeMdp(ABC):
    """Finite-horizon MDP that can at least be sampled.

    Subclasses set ``horizon`` and ``reward_range``.  Enumerable domains also
    override :meth:`enumerate_outcomes` (required by the oracle).
    """

    horizon: int
    reward_range: tuple[float, float]
    name: str = "mdp"
    default_keying: str = "dag"

    @abstractmethod
    def applicable_actions(self, s: StateId) -> Sequence[ActionId]: ...

    @abstractmethod
    def sample_transition(self, s: StateId, a: ActionId, rng: RngStream) -> tuple[StateId, float]: ...

    def is_terminal(self, s: StateId) -> bool:
        return len(self.applicable_actions(s)) == 0

    @property
    def enumerable(self) -> bool:
        return False

    def enumerate_outcomes(self, s: StateId, a: ActionId) -> list[Outcome]:
        raise CapabilityError(f"{type(self).__name__} cannot enumerate outcomes")

    def player(self, s: StateId) -> int:
        """+1 where the mover maximises, -1 where it minimises."""
        return 1

    def start_states(self) -> list[StateId]:
        raise CapabilityError(f"{type(self).__name__} declares no start states")

    # reward units -> reporting units; differences scale by native_scale
    native_scale: float = 1.0

    def config_dict(self) -> dict:
        return {"name": self.name, "horizon": self.horizon}


class EnumerableMdp(GenerativeMdp):
    """An MDP whose outcome distributions can be listed exactly."""

    @property
    def enumerable(self) -> bool:
        return True

    @abstractmethod
    def enumerate_outcomes(self, s: StateId, a: ActionId) -> list[Outcome]: ...

    def sample_transition(self, s, a, rng):
        if not 0 <= a < len(self.applicable_actions(s)):
            raise ContractViolation(f"action {a} not applicable at state {s!r}")
        return sample_from_outcomes(self.enumerate_outcomes(s, a), rng)


@dataclass(frozen=True)
class Trajectory:
    states: tuple
    actions: tuple
    rewards: tuple
    switch_index: Optional[int] = None

    def __post_init__(self):
        if len(self.states) != len(self.actions) + 1 or len(self.actions) != len(self.rewards):
            raise ContractViolation(
                f"trajectory lengths inconsistent: {len(self.states)} states, "
                f"{len(self.actions)} actions, {len(self.rewards)} rewards"
            )

    def __len__(self) -> int:
        return len(self.actions)

    def reward_to_go(self) -> list[float]:
        """R_i = r_i + R_{i+1}, accumulated from the end (R_k = 0 implicit)."""
        out = [0.0] * len(self.rewards)
        acc = 0.0
        for i in range(len(self.rewards) - 1, -1, -1):
            acc = self.rewards[i] + acc
            out[i] = acc
        return out

    def well_formed(self, mdp: GenerativeMdp, max_depth: Optional[int] = None) -> bool:
        """Ends at a terminal state or exactly at the depth limit."""
        limit = mdp.horizon if max_depth is None else max_depth
        k = len(self)
        if k > limit:
            return False
        return k == limit or mdp.is_terminal(self.states[-1])


Policy = Callable[[StateId, int, RngStream], ActionId]


def rollout(mdp: GenerativeMdp, start: StateId, policy: Policy, max_depth: int,
            rng: RngStream) -> Trajectory:
    """Follow ``policy(state, depth, rng)`` until terminal or ``max_depth`` steps."""
    if max_depth < 1:
        raise ContractViolation("max_depth must be >= 1")
    if mdp.is_terminal(start):
        raise ContractViolation("rollout from a terminal state")
    states, actions, rewards = [start], [], []
    s = start
    for depth in range(max_depth):
        acts = mdp.applicable_actions(s)
        if not acts:
            break
        a = policy(s, depth, rng)
        if a not in acts:
            raise ContractViolation(f"policy chose inapplicable action {a!r} at {s!r}")
        s, r = mdp.sample_transition(s, a, rng)
        states.append(s)
        actions.append(a)
        rewards.append(r)
    return Trajectory(tuple(states), tuple(actions), tuple(rewards))


def uniform_policy(mdp: GenerativeMdp) -> Policy:
    def pick(s, depth, rng):
        return rng.choice_index(len(mdp.applicable_actions(s)))
    return pick


def simple_regret(oracle, s: StateId, h: int, a: ActionId) -> float:
    """Q_h(s, pi*(s,h)) - Q_h(s, a), from the mover's point of view."""
    return oracle.regret(s, h, a)
