from .gametree import GameTreeMdp, GameTreeSpec, gametree_mdp
from .sailing import SailingConfig, SailingMdp, sailing_mdp
from .synthetic import (TableMdp, bandit_mdp, chain_mdp, deterministic_bandit, random_mdp,
                        random_tree_mdp, tiny_benchmark_mdp)

__all__ = [
    "GameTreeMdp", "GameTreeSpec", "gametree_mdp",
    "SailingConfig", "SailingMdp", "sailing_mdp",
    "TableMdp", "bandit_mdp", "chain_mdp", "deterministic_bandit", "random_mdp", "random_tree_mdp", "tiny_benchmark_mdp",
]
