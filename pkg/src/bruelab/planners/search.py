"""Entry points: run a planner from a root state, anytime or at one budget."""

from __future__ import annotations

from typing import Optional, Sequence, Union

import numpy as np

from ..errors import ContractViolation, ResourceCapError
from ..mdp import GenerativeMdp
from ..rng import RngStream
from ..tabular import TabularModel, tabular_of
from . import kernels
from .config import PlannerConfig, as_planner
from .mcts import SearchResult, python_search

NODE_CAP = 20_000_000


def node_capacity(model: TabularModel, config: PlannerConfig, budget: int, H: int,
                  keying: str) -> int:
    if config.family == "uct":
        cap = 1 + budget
    else:
        cap = 1 + budget * max(H - 1, 0)
    if keying == "dag":
        cap = min(cap, model.num_states * H + 1)
    elif model.tree_structured:
        cap = min(cap, model.num_states)
    return max(cap, 1)


def kernel_search(model: TabularModel, root, config: PlannerConfig, rng: RngStream,
                  checkpoints: Sequence[int], H: int, keying: str) -> SearchResult:
    checkpoints = np.asarray(sorted(set(int(b) for b in checkpoints)), dtype=np.int64)
    if checkpoints.size == 0 or checkpoints[0] < 1:
        raise ContractViolation("budgets must be >= 1")
    r = model.index_of(root)
    if model.n_actions[r] == 0:
        raise ContractViolation("cannot plan from a terminal state")
    cap = node_capacity(model, config, int(checkpoints[-1]), H, keying)
    if cap > NODE_CAP:
        raise ResourceCapError("search-tree nodes", cap, NODE_CAP)
    alg = {"uct": kernels.ALG_UCT, "gct": kernels.ALG_GCT}.get(config.algorithm, kernels.ALG_BRUE)
    K = model.max_actions
    snap_q = np.zeros((checkpoints.size, K))
    snap_n = np.zeros((checkpoints.size, K), np.int64)
    stream = rng.child("search")
    st = stream.state()
    err, used = kernels.search_kernel(
        model.n_actions, model.n_out, model.next_state, model.prob, model.reward, model.sign,
        r, H, alg, config.c == "auto", 0.0 if config.c == "auto" else float(config.c),
        float(config.epsilon), float(config.alpha),
        config.algorithm in ("brue-alpha", "brue-per-alpha"), config.permissive,
        keying == "tree", cap, checkpoints, snap_q, snap_n, st)
    if err == kernels.ERR_NODES:
        raise ResourceCapError("search-tree nodes", used + 1, cap)
    stream.sync(st)
    na = int(model.n_actions[r])
    return SearchResult(checkpoints, snap_q[:, :na], snap_n[:, :na], int(model.sign[r]), int(used))


def mcts_search(mdp: GenerativeMdp, root, config: Union[str, PlannerConfig], rng: RngStream,
                budgets: Sequence[int], route: str = "auto",
                horizon: Optional[int] = None) -> SearchResult:
    """Anytime search: root statistics snapshotted at every budget in ``budgets``.

    ``route='kernel'`` needs an enumerable MDP; ``'python'`` works on any
    generative MDP; ``'auto'`` prefers the kernel.
    """
    config = as_planner(config)
    if config.family == "flat":
        raise ContractViolation("flat-policy planners are run through naive/crafty_uniform_plan")
    H = mdp.horizon if horizon is None else int(horizon)
    keying = config.keying or mdp.default_keying
    if route == "auto":
        route = "kernel" if mdp.enumerable else "python"
    if route == "kernel":
        return kernel_search(tabular_of(mdp), root, config, rng, budgets, H, keying)
    if route == "python":
        return python_search(mdp, root, config, rng, budgets, H)
    raise ValueError(f"unknown route {route!r}")


def mcts_plan(mdp: GenerativeMdp, root, budget: int, config: Union[str, PlannerConfig],
              rng: RngStream, route: str = "auto") -> int:
    """Run ``budget`` iterations and return the recommended root action."""
    config = as_planner(config)
    if budget < 1:
        raise ContractViolation("budget must be >= 1")
    result = mcts_search(mdp, root, config, rng, [budget], route)
    return result.recommend(budget, config.recommend, rng)
