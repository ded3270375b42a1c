from .config import ALGORITHMS, PlannerConfig, as_planner, parse_planner
from .flat import (FlatPolicySet, crafty_uniform_plan, enumerate_flat_policies, flat_policy_count,
                   naive_uniform_plan)
from .mcts import (PythonSearch, SearchResult, brue_alpha_update, brue_iteration, brue_per_update,
                   brue_recommend, brue_switch, epsilon_greedy_uct_root, greedy_action,
                   recommend_from, uct_select, uct_update)
from .search import mcts_plan, mcts_search
from .tree import NodeStats, SearchTree, window_size

__all__ = [
    "ALGORITHMS", "PlannerConfig", "as_planner", "parse_planner",
    "FlatPolicySet", "crafty_uniform_plan", "enumerate_flat_policies", "flat_policy_count",
    "naive_uniform_plan",
    "PythonSearch", "SearchResult", "brue_alpha_update", "brue_iteration", "brue_per_update",
    "brue_recommend", "brue_switch", "epsilon_greedy_uct_root", "greedy_action",
    "recommend_from", "uct_select", "uct_update",
    "mcts_plan", "mcts_search",
    "NodeStats", "SearchTree", "window_size",
]
