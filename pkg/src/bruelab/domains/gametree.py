"""Random two-player game trees with additive move values.

Nodes are numbered heap-style: the root is 0 and child ``a`` of node ``i`` is
``i * B + 1 + a``.  The value of the edge entering node ``c`` is a
counter-based hash of ``(tree_seed, c)``, so any part of the tree can be
regenerated on demand.  MAX moves (even depths) draw from [0, 127], MIN moves
from [-127, 0]; a leaf pays the sum of its path.

Planners see rewards rescaled into [0, 1] by the fixed map
``(payoff + L) / (2 L)`` with ``L = 127 * ceil(D / 2)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..errors import ConfigError, ContractViolation
from ..mdp import EnumerableMdp
from ..rng import _SEED_SALT, GOLDEN, MASK64, mix64, stream_key
from ..tabular import TabularModel

MOVE_VALUE_MAX = 127


@dataclass(frozen=True)
class GameTreeSpec:
    branching: int
    depth: int
    tree_seed: int = 0
    # explicit signed edge values in heap order (edge into node c at c-1)
    move_values: Optional[Sequence[int]] = None

    def validate(self) -> None:
        if self.branching < 2 or self.depth < 1:
            raise ConfigError("game tree needs branching >= 2 and depth >= 1")
        if self.move_values is not None:
            n_edges = num_nodes(self.branching, self.depth) - 1
            if len(self.move_values) != n_edges:
                raise ConfigError(f"expected {n_edges} move values, got {len(self.move_values)}")
            for c, v in enumerate(self.move_values, start=1):
                lo, hi = (0, MOVE_VALUE_MAX) if _edge_is_max(c, self.branching) else (-MOVE_VALUE_MAX, 0)
                if not lo <= v <= hi:
                    raise ConfigError(f"move value {v} into node {c} outside [{lo}, {hi}]")

    def as_dict(self) -> dict:
        d = {"branching": self.branching, "depth": self.depth, "tree_seed": self.tree_seed}
        if self.move_values is not None:
            d["move_values"] = list(self.move_values)
        return d


def num_nodes(branching: int, depth: int) -> int:
    return (branching ** (depth + 1) - 1) // (branching - 1)


def node_depth(c: int, branching: int) -> int:
    d = 0
    while c > 0:
        c = (c - 1) // branching
        d += 1
    return d


def _edge_is_max(c: int, branching: int) -> bool:
    # the edge into c is played at the parent's depth
    return node_depth(c, branching) % 2 == 1


def hashed_move_value(tree_seed: int, c: int, maximizing: bool) -> int:
    v = mix64(stream_key(tree_seed, c)) % (MOVE_VALUE_MAX + 1)
    return v if maximizing else -v


def _hashed_values_vec(tree_seed: int, nodes: np.ndarray) -> np.ndarray:
    """Vectorised ``abs(hashed_move_value)`` for an array of node numbers."""
    inner = np.uint64(mix64((tree_seed ^ _SEED_SALT) & MASK64))
    z = inner + nodes.astype(np.uint64) * np.uint64(GOLDEN)
    z = _mix_vec(_mix_vec(z))  # stream_key, then mix64 of it
    return (z % np.uint64(MOVE_VALUE_MAX + 1)).astype(np.int64)


def _mix_vec(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


class GameTreeMdp(EnumerableMdp):
    name = "gametree"
    default_keying = "tree"

    def __init__(self, spec: GameTreeSpec):
        spec.validate()
        self.spec = spec
        self.B = spec.branching
        self.D = spec.depth
        self.horizon = spec.depth
        self.n_nodes = num_nodes(self.B, self.D)
        self.first_leaf = num_nodes(self.B, self.D - 1)
        self.payoff_bound = MOVE_VALUE_MAX * ((self.D + 1) // 2)
        self.reward_range = (0.0, 1.0)
        self.native_scale = 2.0 * self.payoff_bound

    def depth_of(self, s: int) -> int:
        return node_depth(s, self.B)

    def move_value(self, c: int) -> int:
        """Signed value of the edge entering node ``c`` (hidden from planners)."""
        if self.spec.move_values is not None:
            return int(self.spec.move_values[c - 1])
        return hashed_move_value(self.spec.tree_seed, c, _edge_is_max(c, self.B))

    def payoff(self, leaf: int) -> int:
        total = 0
        c = leaf
        while c > 0:
            total += self.move_value(c)
            c = (c - 1) // self.B
        return total

    def rescale(self, payoff: float) -> float:
        return (payoff + self.payoff_bound) / (2.0 * self.payoff_bound)

    def applicable_actions(self, s):
        return range(0) if s >= self.first_leaf else range(self.B)

    def is_terminal(self, s) -> bool:
        return s >= self.first_leaf

    def player(self, s) -> int:
        return 1 if self.depth_of(s) % 2 == 0 else -1

    def enumerate_outcomes(self, s, a):
        if s >= self.first_leaf or not 0 <= a < self.B:
            raise ContractViolation(f"action {a} not applicable at node {s}")
        c = s * self.B + 1 + a
        r = self.rescale(self.payoff(c)) if c >= self.first_leaf else 0.0
        return [(c, 1.0, r)]

    def start_states(self) -> list[int]:
        return [0]

    # --- whole-tree arrays (cheap even for 2^17 nodes)

    def edge_values(self) -> np.ndarray:
        """Signed value of the edge into every node (entry 0 unused)."""
        nodes = np.arange(self.n_nodes, dtype=np.int64)
        if self.spec.move_values is not None:
            vals = np.zeros(self.n_nodes, np.int64)
            vals[1:] = np.asarray(self.spec.move_values, dtype=np.int64)
            return vals
        vals = _hashed_values_vec(self.spec.tree_seed, nodes)
        depths = self.depths()
        vals = np.where(depths % 2 == 1, vals, -vals)
        vals[0] = 0
        return vals

    def depths(self) -> np.ndarray:
        out = np.empty(self.n_nodes, np.int64)
        start = 0
        for d in range(self.D + 1):
            width = self.B ** d
            out[start:start + width] = d
            start += width
        return out

    def payoffs(self) -> np.ndarray:
        """Path sums for every node (leaf entries are the leaf payoffs)."""
        vals = self.edge_values()
        acc = vals.copy()
        start, width = 1, self.B
        for _ in range(self.D):
            idx = np.arange(start, start + width)
            acc[idx] += acc[(idx - 1) // self.B]
            start += width
            width *= self.B
        return acc

    def to_tabular(self) -> TabularModel:
        S, B = self.n_nodes, self.B
        internal = self.first_leaf
        idx = np.arange(S, dtype=np.int64)
        n_actions = np.where(idx < internal, B, 0).astype(np.int64)
        n_out = np.zeros((S, B), np.int64)
        n_out[:internal] = 1
        nxt = np.repeat(idx[:, None], B, axis=1)
        nxt[:internal] = idx[:internal, None] * B + 1 + np.arange(B)[None, :]
        nxt = nxt[:, :, None].copy()
        prob = np.zeros((S, B, 1))
        prob[:internal] = 1.0
        cum = np.ones((S, B, 1))
        payoffs = self.payoffs()
        rew = np.zeros((S, B, 1))
        child = nxt[:internal, :, 0]
        leaf_child = child >= internal
        scaled = (payoffs[child] + self.payoff_bound) / (2.0 * self.payoff_bound)
        rew[:internal, :, 0] = np.where(leaf_child, scaled, 0.0)
        depths = self.depths()
        sign = np.where(depths % 2 == 0, 1.0, -1.0)
        return TabularModel(n_actions, n_out, nxt, prob, cum, rew, sign,
                            states=list(range(S)), index=None, tree_structured=True,
                            depth_of=depths)

    def config_dict(self) -> dict:
        return {"name": self.name, "horizon": self.horizon, **self.spec.as_dict()}


def gametree_mdp(spec: GameTreeSpec) -> GameTreeMdp:
    return GameTreeMdp(spec)
