"""Flat policies and the two schematic flat-policy bandit planners.

A flat policy maps (state, steps-to-go) to an action, defined exactly on the
decision points it reaches itself from the root.  Treating every flat policy as
one bandit arm gives NaiveUniform (round-robin over policies) and
CraftyUniform (uniform rollouts credited to every consistent policy).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Optional, Sequence

import numpy as np
from numba import njit

from ..errors import ContractViolation, InsufficientBudgetError, ResourceCapError
from ..mdp import GenerativeMdp
from ..rng import RngStream, nb_choice_index, nb_random
from ..tabular import TabularModel, tabular_of

DEFAULT_POLICY_CAP = 1 << 16


def flat_policy_count(K: int, B: int, H: int) -> int:
    """K ** (sum_{i<H} B**i): policies of a tree MDP with uniform K and B."""
    return K ** sum(B ** i for i in range(H))


@dataclass(eq=False)
class FlatPolicySet:
    model: TabularModel
    root: int                 # state index
    horizon: int
    table: np.ndarray         # (P, C) action per decision column, -1 undefined
    col: np.ndarray           # (S, H+1) column of (state, steps-to-go), -1 if none
    points: list              # column -> (state index, steps-to-go)

    @property
    def count(self) -> int:
        return int(self.table.shape[0])

    @property
    def root_col(self) -> int:
        return int(self.col[self.root, self.horizon])

    def root_actions(self) -> np.ndarray:
        return self.table[:, self.root_col]

    def action(self, pi: int, s_idx: int, h: int) -> int:
        c = self.col[s_idx, h]
        return -1 if c < 0 else int(self.table[pi, c])

    def value(self, pi: int) -> float:
        """Exact expected return of policy ``pi`` by outcome-tree enumeration."""
        m = self.model
        memo: dict = {}

        def v(s: int, h: int) -> float:
            if h == 0 or m.n_actions[s] == 0:
                return 0.0
            key = (s, h)
            if key not in memo:
                a = self.action(pi, s, h)
                total = 0.0
                for j in range(m.n_out[s, a]):
                    total += m.prob[s, a, j] * (m.reward[s, a, j] + v(int(m.next_state[s, a, j]), h - 1))
                memo[key] = total
            return memo[key]

        return v(self.root, self.horizon)

    def values(self) -> np.ndarray:
        return np.array([self.value(pi) for pi in range(self.count)])

    def consistent(self, states: Sequence[int], actions: Sequence[int]) -> np.ndarray:
        """Mask of policies defined on, and agreeing with, every step of a trajectory."""
        mask = np.ones(self.count, dtype=bool)
        for i, (s, a) in enumerate(zip(states, actions)):
            c = self.col[s, self.horizon - i]
            if c < 0:
                return np.zeros(self.count, dtype=bool)
            mask &= self.table[:, c] == a
        return mask


def enumerate_flat_policies(mdp: GenerativeMdp, s0, H: Optional[int] = None,
                            cap: int = DEFAULT_POLICY_CAP) -> FlatPolicySet:
    """All flat policies from ``s0``, built level by level over the decision frontier."""
    model = tabular_of(mdp)
    H = mdp.horizon if H is None else int(H)
    root = model.index_of(s0)
    if model.n_actions[root] == 0 or H < 1:
        raise ContractViolation("flat policies need a non-terminal root and H >= 1")
    col = np.full((model.num_states, H + 1), -1, dtype=np.int64)
    points: list = []
    policies: list = []

    def column(s: int, h: int) -> int:
        if col[s, h] < 0:
            col[s, h] = len(points)
            points.append((s, h))
        return int(col[s, h])

    def rec(frontier: list, h: int, assignment: list) -> None:
        if not frontier:
            if len(policies) >= cap:
                raise ResourceCapError("flat policies", len(policies) + 1, cap)
            policies.append(assignment)
            return
        cols = [column(s, h) for s in frontier]
        for combo in product(*(range(int(model.n_actions[s])) for s in frontier)):
            nxt = set()
            if h > 1:
                for s, a in zip(frontier, combo):
                    for j in range(model.n_out[s, a]):
                        s2 = int(model.next_state[s, a, j])
                        if model.n_actions[s2] > 0:
                            nxt.add(s2)
            rec(sorted(nxt), h - 1, assignment + list(zip(cols, combo)))

    rec([root], H, [])
    table = np.full((len(policies), len(points)), -1, dtype=np.int64)
    for i, assignment in enumerate(policies):
        for c, a in assignment:
            table[i, c] = a
    return FlatPolicySet(model, root, H, table, col, points)


# --- compiled runs --------------------------------------------------------


@njit(cache=True)
def _step(n_out, next_state, prob, reward, s, a, st):
    no = n_out[s, a]
    if no == 1:
        return next_state[s, a, 0], reward[s, a, 0]
    u = nb_random(st)
    acc = 0.0
    for j in range(no):
        acc += prob[s, a, j]
        if u < acc:
            return next_state[s, a, j], reward[s, a, j]
    return next_state[s, a, no - 1], reward[s, a, no - 1]


@njit(cache=True)
def naive_kernel(n_actions, n_out, next_state, prob, reward, table, col, root, H,
                 checkpoints, snap_q, snap_n, st):
    P = table.shape[0]
    q = np.zeros(P)
    n = np.zeros(P, np.int64)
    ck = 0
    budget = checkpoints[checkpoints.shape[0] - 1]
    for t in range(budget):
        pi = t % P
        s = root
        h = H
        g = 0.0
        while h > 0 and n_actions[s] > 0:
            a = table[pi, col[s, h]]
            s, r = _step(n_out, next_state, prob, reward, s, a, st)
            g += r
            h -= 1
        n[pi] += 1
        q[pi] += (g - q[pi]) / n[pi]
        while ck < checkpoints.shape[0] and checkpoints[ck] == t + 1:
            snap_q[ck] = q
            snap_n[ck] = n
            ck += 1


@njit(cache=True)
def crafty_kernel(n_actions, n_out, next_state, prob, reward, table, col, root, H,
                  checkpoints, snap_q, snap_n, st):
    P = table.shape[0]
    q = np.zeros(P)
    n = np.zeros(P, np.int64)
    cols = np.empty(H, np.int64)
    acts = np.empty(H, np.int64)
    ck = 0
    budget = checkpoints[checkpoints.shape[0] - 1]
    for t in range(budget):
        s = root
        h = H
        g = 0.0
        k = 0
        while h > 0 and n_actions[s] > 0:
            a = nb_choice_index(st, n_actions[s])
            cols[k] = col[s, h]
            acts[k] = a
            k += 1
            s, r = _step(n_out, next_state, prob, reward, s, a, st)
            g += r
            h -= 1
        for pi in range(P):
            ok = True
            for i in range(k):
                if cols[i] < 0 or table[pi, cols[i]] != acts[i]:
                    ok = False
                    break
            if ok:
                n[pi] += 1
                q[pi] += (g - q[pi]) / n[pi]
        while ck < checkpoints.shape[0] and checkpoints[ck] == t + 1:
            snap_q[ck] = q
            snap_n[ck] = n
            ck += 1


# --- reference loops (same draw order) ----------------------------------


def _python_run(fps: FlatPolicySet, mdp: GenerativeMdp, crafty: bool, checkpoints, rng: RngStream):
    m = fps.model
    P = fps.count
    q = np.zeros(P)
    n = np.zeros(P, dtype=np.int64)
    snaps_q, snaps_n = [], []
    ck = 0
    for t in range(checkpoints[-1]):
        s_idx, h, g = fps.root, fps.horizon, 0.0
        visited, chosen = [], []
        while h > 0 and m.n_actions[s_idx] > 0:
            s = m.states[s_idx]
            if crafty:
                a = rng.choice_index(len(mdp.applicable_actions(s)))
            else:
                a = fps.action(t % P, s_idx, h)
            visited.append(s_idx)
            chosen.append(a)
            s2, r = mdp.sample_transition(s, a, rng)
            s_idx = m.index_of(s2)
            g += r
            h -= 1
        targets = np.flatnonzero(fps.consistent(visited, chosen)) if crafty else [t % P]
        for pi in targets:
            n[pi] += 1
            q[pi] += (g - q[pi]) / n[pi]
        while ck < len(checkpoints) and checkpoints[ck] == t + 1:
            snaps_q.append(q.copy())
            snaps_n.append(n.copy())
            ck += 1
    return np.array(snaps_q), np.array(snaps_n)


@dataclass
class FlatRun:
    policies: FlatPolicySet
    budgets: np.ndarray
    q: np.ndarray     # (len(budgets), P)
    n: np.ndarray

    def best_policy(self, budget: int, rng: RngStream) -> int:
        i = int(np.flatnonzero(self.budgets == budget)[0])
        q, n = self.q[i], self.n[i]
        seen = np.flatnonzero(n > 0)
        if seen.size == 0:
            raise InsufficientBudgetError("no flat policy has been sampled")
        top = q[seen].max()
        best = seen[q[seen] == top]
        return int(best[rng.choice_index(len(best))])

    def recommend(self, budget: int, rng: RngStream) -> int:
        pi = self.best_policy(budget, rng.child("recommend", int(budget)))
        return int(self.policies.table[pi, self.policies.root_col])


def flat_search(mdp: GenerativeMdp, s0, budgets: Sequence[int], rng: RngStream, crafty: bool,
                policies: Optional[FlatPolicySet] = None, route: str = "kernel",
                cap: int = DEFAULT_POLICY_CAP) -> FlatRun:
    fps = policies if policies is not None else enumerate_flat_policies(mdp, s0, cap=cap)
    checkpoints = sorted(set(int(b) for b in budgets))
    if not checkpoints or checkpoints[0] < 1:
        raise ContractViolation("budgets must be >= 1")
    stream = rng.child("search")
    if route == "python":
        q, n = _python_run(fps, mdp, crafty, checkpoints, stream)
    else:
        m = fps.model
        ck = np.asarray(checkpoints, dtype=np.int64)
        q = np.zeros((ck.size, fps.count))
        n = np.zeros((ck.size, fps.count), dtype=np.int64)
        st = stream.state()
        kern = crafty_kernel if crafty else naive_kernel
        kern(m.n_actions, m.n_out, m.next_state, m.prob, m.reward, fps.table, fps.col,
             fps.root, fps.horizon, ck, q, n, st)
        stream.sync(st)
    return FlatRun(fps, np.asarray(checkpoints), q, n)


def naive_uniform_plan(mdp: GenerativeMdp, s0, budget: int, rng: RngStream,
                       policies: Optional[FlatPolicySet] = None, route: str = "kernel",
                       cap: int = DEFAULT_POLICY_CAP) -> int:
    """Round-robin over flat policies; recommend the root action of the best mean."""
    run = flat_search(mdp, s0, [budget], rng, False, policies, route, cap)
    return run.recommend(budget, rng)


def crafty_uniform_plan(mdp: GenerativeMdp, s0, budget: int, rng: RngStream,
                        policies: Optional[FlatPolicySet] = None, route: str = "kernel",
                        cap: int = DEFAULT_POLICY_CAP) -> int:
    """Uniform rollouts, each credited to every consistent flat policy."""
    run = flat_search(mdp, s0, [budget], rng, True, policies, route, cap)
    return run.recommend(budget, rng)
