"""Readable reference implementation of the MCTS planners.

Works on any :class:`GenerativeMdp`.  The compiled route in ``kernels`` runs
the same algorithms over a tabular model and consumes the random stream in
exactly the same order, so both produce identical statistics.

Draw order, shared by both routes:
  * tie-breaks and uniform picks use ``choice_index`` (no draw when n == 1);
  * a transition draws one uniform only when it has several outcomes;
  * the epsilon-greedy root always draws its coin first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..errors import ContractViolation, InsufficientBudgetError
from ..mdp import GenerativeMdp, Trajectory
from ..rng import RngStream
from .config import PlannerConfig
from .tree import NodeStats, SearchTree


# --- selection rules -------------------------------------------------------


def exploration_coefficient(stats: NodeStats, c) -> float:
    if c != "auto":
        return float(c)
    visited = [stats.value(a) for a, k in enumerate(stats.n) if k > 0]
    if not visited:
        return 1.0
    # magnitude of the best value, so cost domains get a positive bonus too
    return abs(max(visited))


def uct_select(stats: NodeStats, c, rng: RngStream) -> int:
    """UCB1: unexplored actions first, then argmax of Q̂ + c sqrt(ln n(s) / n(s,a))."""
    fresh = stats.unvisited()
    if fresh:
        return fresh[rng.choice_index(len(fresh))]
    coef = exploration_coefficient(stats, c)
    log_total = math.log(stats.visits)
    scores = [stats.value(a) + coef * math.sqrt(log_total / k) for a, k in enumerate(stats.n)]
    top = max(scores)
    best = [a for a, sc in enumerate(scores) if sc == top]
    return best[rng.choice_index(len(best))]


def greedy_action(stats: Optional[NodeStats], n_actions: int, rng: RngStream) -> int:
    """Uniform over Q̂-maximisers among visited actions; all-unvisited counts as all tied."""
    best = stats.best_visited() if stats is not None else []
    if not best:
        return rng.choice_index(n_actions)
    return best[rng.choice_index(len(best))]


def epsilon_greedy_uct_root(stats: NodeStats, epsilon: float, rng: RngStream) -> int:
    coin = rng.random()
    if coin < epsilon:
        return rng.choice_index(stats.n_actions)
    return greedy_action(stats, stats.n_actions, rng)


def brue_switch(n: int, H: int) -> int:
    """Switching point: reverse round-robin over {1..H}."""
    if n < 1 or H < 1:
        raise ContractViolation("brue_switch needs n >= 1 and H >= 1")
    return H - ((n - 1) % H)


def uct_update(stats: NodeStats, trajectory: Trajectory, i: int,
               rtg: Optional[Sequence[float]] = None) -> NodeStats:
    """Credit the reward-to-go from step i to (s_i, a_{i+1})."""
    rtg = trajectory.reward_to_go() if rtg is None else rtg
    stats.add_mean(trajectory.actions[i], rtg[i])
    return stats


def brue_alpha_update(stats: NodeStats, a: int, ret: float, alpha: float) -> NodeStats:
    stats.add_window(a, ret, alpha)
    return stats


def recommend_from(q: Sequence[float], n: Sequence[int], sign: int, mode: str,
                   rng: RngStream) -> int:
    """Recommendation from root statistics: best signed Q̂ (or most visits), ties uniform."""
    visited = [a for a, k in enumerate(n) if k > 0]
    if not visited:
        raise InsufficientBudgetError("no root action has been evaluated")
    if mode == "visits":
        top = max(n[a] for a in visited)
        best = [a for a in visited if n[a] == top]
    else:
        top = max(sign * q[a] for a in visited)
        best = [a for a in visited if sign * q[a] == top]
    return best[rng.choice_index(len(best))]


def brue_recommend(tree: SearchTree, rng: RngStream) -> int:
    root = tree.root
    return recommend_from(root.q, root.n, root.sign, "q", rng)


# --- iterations ------------------------------------------------------------


@dataclass
class _Walk:
    states: list
    actions: list = field(default_factory=list)
    rewards: list = field(default_factory=list)
    nodes: list = field(default_factory=list)   # node id per visited state, None if outside

    def trajectory(self, switch: Optional[int] = None) -> Trajectory:
        return Trajectory(tuple(self.states), tuple(self.actions), tuple(self.rewards), switch)


class PythonSearch:
    """One search from a root state; call :meth:`iterate` ``budget`` times."""

    def __init__(self, mdp: GenerativeMdp, root, config: PlannerConfig, rng: RngStream,
                 horizon: Optional[int] = None):
        if mdp.is_terminal(root):
            raise ContractViolation("cannot plan from a terminal state")
        self.mdp = mdp
        self.config = config
        self.rng = rng
        self.H = mdp.horizon if horizon is None else horizon
        self.keying = config.keying or mdp.default_keying
        self.tree = SearchTree(self.keying)
        self.windowed = config.algorithm in ("brue-alpha", "brue-per-alpha")
        self.tree.add(self._fresh(root, 0), key=(root, 0) if self.keying == "dag" else None)
        self.iterations = 0
        self.last_trajectory: Optional[Trajectory] = None
        self.cells_updated = 0

    def _fresh(self, s, depth: int) -> NodeStats:
        return NodeStats.fresh(s, depth, len(self.mdp.applicable_actions(s)), self.mdp.player(s),
                               keep_rewards=self.windowed)

    def _child(self, parent: Optional[int], a: int, s2, depth: int,
               create: bool) -> tuple[Optional[int], bool]:
        """(node id for s2 at ``depth``, whether it was just created)."""
        if depth >= self.H or self.mdp.is_terminal(s2):
            return None, False
        nid = self.tree.lookup(parent, a, s2, depth)
        if nid is None and create and (self.keying == "dag" or parent is not None):
            nid = self.tree.add(self._fresh(s2, depth), key=self.tree.key(parent, a, s2, depth))
            return nid, True
        return nid, False

    def iterate(self) -> Trajectory:
        self.iterations += 1
        if self.config.family == "uct":
            traj = self._uct_iteration()
        else:
            traj = self._brue_iteration(self.iterations)
        self.last_trajectory = traj
        return traj

    def _uct_iteration(self) -> Trajectory:
        mdp, rng, tree = self.mdp, self.rng, self.tree
        s, node = tree.root.state, 0
        walk = _Walk([s], nodes=[0])
        expanded = False
        depth = 0
        while depth < self.H and not mdp.is_terminal(s):
            if node is not None:
                stats = tree.nodes[node]
                if self.config.algorithm == "gct" and depth == 0:
                    a = epsilon_greedy_uct_root(stats, self.config.epsilon, rng)
                else:
                    a = uct_select(stats, self.config.c, rng)
            else:
                a = rng.choice_index(len(mdp.applicable_actions(s)))
            s2, r = mdp.sample_transition(s, a, rng)
            depth += 1
            nxt, created = self._child(node, a, s2, depth, create=not expanded)
            expanded = expanded or created
            walk.states.append(s2)
            walk.actions.append(a)
            walk.rewards.append(r)
            walk.nodes.append(nxt)
            node, s = nxt, s2
        traj = walk.trajectory()
        rtg = traj.reward_to_go()
        for i in range(len(traj) - 1, -1, -1):
            if walk.nodes[i] is not None:
                uct_update(tree.nodes[walk.nodes[i]], traj, i, rtg)
                self.cells_updated += 1
        return traj

    def _brue_iteration(self, n: int) -> Trajectory:
        mdp, rng, tree = self.mdp, self.rng, self.tree
        sigma = brue_switch(n, self.H)
        s, node = tree.root.state, 0
        walk = _Walk([s], nodes=[0])
        depth = 0
        while depth < self.H and not mdp.is_terminal(s):
            k = len(mdp.applicable_actions(s))
            if depth < sigma:
                a = rng.choice_index(k)
            else:
                a = greedy_action(tree.nodes[node] if node is not None else None, k, rng)
            s2, r = mdp.sample_transition(s, a, rng)
            depth += 1
            nxt, _ = self._child(node, a, s2, depth, create=depth <= sigma - 1)
            walk.states.append(s2)
            walk.actions.append(a)
            walk.rewards.append(r)
            walk.nodes.append(nxt)
            node, s = nxt, s2
        traj = walk.trajectory(switch=sigma)
        if len(traj) >= sigma:   # otherwise the episode ended before the switching cell
            self._brue_update(walk, traj, sigma)
        return traj

    def _brue_update(self, walk: _Walk, traj: Trajectory, sigma: int) -> None:
        rtg = traj.reward_to_go()
        nodes = self.tree.nodes
        alpha = self.config.alpha
        extra = []
        if self.config.permissive:
            extra = brue_per_ancestors(self.tree, walk.nodes, traj.actions, sigma)
        cell = nodes[walk.nodes[sigma - 1]]
        self._credit(cell, traj.actions[sigma - 1], rtg[sigma - 1], alpha)
        for i in extra:
            self._credit(nodes[walk.nodes[i]], traj.actions[i], rtg[i], alpha)

    def _credit(self, stats: NodeStats, a: int, ret: float, alpha: float) -> None:
        if self.windowed:
            brue_alpha_update(stats, a, ret, alpha)
        else:
            stats.add_mean(a, ret)
        self.cells_updated += 1

    def root_stats(self) -> tuple[list, list, int]:
        root = self.tree.root
        return list(root.q), list(root.n), root.sign


def brue_per_ancestors(tree: SearchTree, node_ids: Sequence, actions: Sequence[int],
                       sigma: int) -> list[int]:
    """Depths i < sigma - 1 whose cell (s_i, a_{i+1}) the permissive rule also updates.

    Qualifies when some action at s_i is unvisited or a_{i+1} is a current
    Q̂-maximiser; judged on the statistics before this iteration's update.
    """
    out = []
    for i in range(sigma - 1):
        stats = tree.nodes[node_ids[i]]
        if stats.unvisited() or actions[i] in stats.best_visited():
            out.append(i)
    return out


def brue_per_update(tree: SearchTree, node_ids: Sequence, trajectory: Trajectory, sigma: int,
                    alpha: float = 1.0) -> list[int]:
    """Strict switching-cell update plus qualifying ancestors; returns updated depths."""
    rtg = trajectory.reward_to_go()
    extra = brue_per_ancestors(tree, node_ids, trajectory.actions, sigma)
    for i in [sigma - 1] + extra:
        tree.nodes[node_ids[i]].add_window(trajectory.actions[i], rtg[i], alpha)
    return [sigma - 1] + extra


def brue_iteration(tree: SearchTree, mdp: GenerativeMdp, n: int, rng: RngStream,
                   config: Optional[PlannerConfig] = None) -> Trajectory:
    """One BRUE iteration on an existing tree (root = ``tree.nodes[0]``)."""
    config = config or PlannerConfig("brue", keying=tree.keying)
    search = PythonSearch.__new__(PythonSearch)
    search.mdp, search.config, search.rng = mdp, config, rng
    search.H = mdp.horizon
    search.keying = tree.keying
    search.tree = tree
    search.windowed = config.algorithm in ("brue-alpha", "brue-per-alpha")
    search.iterations = n - 1
    search.cells_updated = 0
    return search.iterate()


# --- drivers -----------------------------------------------------------------


@dataclass
class SearchResult:
    budgets: np.ndarray     # checkpoint budgets
    root_q: np.ndarray      # (len(budgets), K)
    root_n: np.ndarray      # (len(budgets), K)
    sign: int
    nodes: int

    def recommend(self, budget: int, mode: str, rng: RngStream) -> int:
        i = int(np.searchsorted(self.budgets, budget))
        if i >= len(self.budgets) or self.budgets[i] != budget:
            raise KeyError(f"budget {budget} was not a checkpoint")
        return recommend_from(self.root_q[i].tolist(), self.root_n[i].tolist(), self.sign, mode,
                              recommend_stream(rng, budget))


def recommend_stream(rng: RngStream, budget: int) -> RngStream:
    return rng.child("recommend", int(budget))


def python_search(mdp: GenerativeMdp, root, config: PlannerConfig, rng: RngStream,
                  checkpoints: Sequence[int], horizon: Optional[int] = None) -> SearchResult:
    checkpoints = sorted(set(int(b) for b in checkpoints))
    if not checkpoints or checkpoints[0] < 1:
        raise ContractViolation("budgets must be >= 1")
    search = PythonSearch(mdp, root, config, rng.child("search"), horizon)
    K = search.tree.root.n_actions
    qs = np.zeros((len(checkpoints), K))
    ns = np.zeros((len(checkpoints), K), dtype=np.int64)
    j = 0
    for it in range(1, checkpoints[-1] + 1):
        search.iterate()
        while j < len(checkpoints) and checkpoints[j] == it:
            q, n, _ = search.root_stats()
            qs[j], ns[j] = q, n
            j += 1
    return SearchResult(np.asarray(checkpoints), qs, ns, search.tree.root.sign, len(search.tree))
