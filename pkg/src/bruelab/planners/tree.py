"""Search-tree bookkeeping for the pure-Python planners."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Hashable, Optional

# tolerance so that alpha * n landing a hair above an integer does not add one
_CEIL_SLACK = 1e-9


def window_size(alpha: float, n: int) -> int:
    """ceil(alpha * n), clipped to [1, n]."""
    m = int(math.ceil(alpha * n - _CEIL_SLACK))
    return min(max(m, 1), n)


@dataclass
class NodeStats:
    """Statistics of one (state, depth) node: n(s,a), Q̂(s,a) and the reward lists."""

    state: Hashable
    depth: int
    sign: int
    n: list
    q: list
    rewards: Optional[list] = None   # L(s,a), only kept by BRUE(alpha)
    prefix: Optional[list] = None    # running sums of L(s,a), leading 0.0
    updates: int = 0                 # instrumentation: cells touched at this node

    @classmethod
    def fresh(cls, state, depth: int, n_actions: int, sign: int = 1,
              keep_rewards: bool = False) -> "NodeStats":
        node = cls(state, depth, sign, [0] * n_actions, [0.0] * n_actions)
        if keep_rewards:
            node.rewards = [[] for _ in range(n_actions)]
            node.prefix = [[0.0] for _ in range(n_actions)]
        return node

    @property
    def n_actions(self) -> int:
        return len(self.n)

    @property
    def visits(self) -> int:
        return sum(self.n)

    def unvisited(self) -> list[int]:
        return [a for a, c in enumerate(self.n) if c == 0]

    def value(self, a: int) -> float:
        """Q̂ from the mover's point of view (negated at MIN nodes)."""
        return self.sign * self.q[a]

    def best_visited(self) -> list[int]:
        """Visited actions whose signed Q̂ is maximal (exact ties)."""
        visited = [a for a, c in enumerate(self.n) if c > 0]
        if not visited:
            return []
        top = max(self.value(a) for a in visited)
        return [a for a in visited if self.value(a) == top]

    def add_mean(self, a: int, ret: float) -> None:
        """Incremental running mean: Q̂ += (R - Q̂) / n."""
        self.n[a] += 1
        self.q[a] += (ret - self.q[a]) / self.n[a]
        self.updates += 1

    def add_window(self, a: int, ret: float, alpha: float) -> None:
        """Append R to L(s,a); Q̂ = mean of the last ceil(alpha * n) entries."""
        if self.rewards is None:
            self.rewards = [[] for _ in self.n]
            self.prefix = [[0.0] for _ in self.n]
        self.n[a] += 1
        n = self.n[a]
        self.rewards[a].append(ret)
        pre = self.prefix[a]
        pre.append(pre[-1] + ret)
        m = window_size(alpha, n)
        if m == n:
            self.q[a] += (ret - self.q[a]) / n
        else:
            self.q[a] = (pre[n] - pre[n - m]) / m
        self.updates += 1


@dataclass
class SearchTree:
    """Nodes keyed by (state, depth) in dag mode or by the path in tree mode."""

    keying: str
    nodes: list = field(default_factory=list)
    index: dict = field(default_factory=dict)

    def key(self, parent: Optional[int], action: int, state, depth: int):
        if self.keying == "dag":
            return (state, depth)
        return (parent, action, state)

    def lookup(self, parent: Optional[int], action: int, state, depth: int) -> Optional[int]:
        if self.keying == "tree" and parent is None:
            return None   # left the tree; paths cannot re-enter it
        return self.index.get(self.key(parent, action, state, depth))

    def add(self, stats: NodeStats, key=None) -> int:
        nid = len(self.nodes)
        self.nodes.append(stats)
        if key is not None:
            self.index[key] = nid
        return nid

    @property
    def root(self) -> NodeStats:
        return self.nodes[0]

    def __len__(self) -> int:
        return len(self.nodes)
