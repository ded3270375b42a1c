"""Dense array form of an enumerable MDP.

The oracle and the compiled planners both work on this representation.
Outcome slots are padded; ``n_out[s, a]`` says how many are real.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .errors import CapabilityError, ResourceCapError
from .mdp import GenerativeMdp

DEFAULT_STATE_CAP = 2_000_000


@dataclass(eq=False)
class TabularModel:
    n_actions: np.ndarray      # (S,) int64
    n_out: np.ndarray          # (S, K) int64
    next_state: np.ndarray     # (S, K, B) int64, indices into states
    prob: np.ndarray           # (S, K, B) float64
    cum: np.ndarray            # (S, K, B) float64, running sums of prob
    reward: np.ndarray         # (S, K, B) float64
    sign: np.ndarray           # (S,) float64, +1 max / -1 min
    states: list               # index -> StateId
    index: Optional[dict] = None   # StateId -> index; None means identity
    tree_structured: bool = False
    depth_of: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def num_states(self) -> int:
        return int(self.n_actions.shape[0])

    @property
    def max_actions(self) -> int:
        return int(self.next_state.shape[1])

    @property
    def max_outcomes(self) -> int:
        return int(self.next_state.shape[2])

    def index_of(self, s) -> int:
        if self.index is None:
            return int(s)
        return self.index[s]


def cumulative(probs: Iterable[float]) -> list[float]:
    acc = 0.0
    out = []
    for p in probs:
        acc += p
        out.append(acc)
    return out


def compile_tabular(mdp: GenerativeMdp, start_states: Optional[list] = None,
                    cap: int = DEFAULT_STATE_CAP) -> TabularModel:
    """Enumerate every state reachable from ``start_states`` into arrays."""
    if not mdp.enumerable:
        raise CapabilityError(f"{type(mdp).__name__} is not enumerable")
    starts = list(start_states) if start_states is not None else mdp.start_states()
    index: dict = {}
    states: list = []
    queue = deque()
    for s in starts:
        if s not in index:
            index[s] = len(states)
            states.append(s)
            queue.append(s)
    rows = []  # per state: list over actions of outcome lists
    while queue:
        s = queue.popleft()
        per_action = []
        for a in range(len(mdp.applicable_actions(s))):
            outs = mdp.enumerate_outcomes(s, a)
            per_action.append(outs)
            for s2, _, _ in outs:
                if s2 not in index:
                    if len(states) >= cap:
                        raise ResourceCapError("reachable states", len(states) + 1, cap)
                    index[s2] = len(states)
                    states.append(s2)
                    queue.append(s2)
        rows.append(per_action)
    S = len(states)
    K = max(1, max((len(r) for r in rows), default=1))
    B = max(1, max((len(o) for r in rows for o in r), default=1))
    n_actions = np.zeros(S, np.int64)
    n_out = np.zeros((S, K), np.int64)
    nxt = np.zeros((S, K, B), np.int64)
    prob = np.zeros((S, K, B))
    cum = np.ones((S, K, B))
    rew = np.zeros((S, K, B))
    sign = np.ones(S)
    for i, per_action in enumerate(rows):
        nxt[i] = i
        n_actions[i] = len(per_action)
        sign[i] = mdp.player(states[i])
        for a, outs in enumerate(per_action):
            n_out[i, a] = len(outs)
            c = cumulative(p for _, p, _ in outs)
            for j, (s2, p, r) in enumerate(outs):
                nxt[i, a, j] = index[s2]
                prob[i, a, j] = p
                cum[i, a, j] = c[j]
                rew[i, a, j] = r
    return TabularModel(n_actions, n_out, nxt, prob, cum, rew, sign, states, index)


def tabular_of(mdp: GenerativeMdp) -> TabularModel:
    """Cached tabular form; domains may provide a faster ``to_tabular``."""
    model = getattr(mdp, "_tabular_cache", None)
    if model is None:
        builder = getattr(mdp, "to_tabular", None)
        model = builder() if builder is not None else compile_tabular(mdp)
        mdp._tabular_cache = model
    return model
