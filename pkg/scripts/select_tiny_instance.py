"""Scan random K=2, B=2, H=3 tree MDPs for a good fixed rate-test instance.

Wanted: one-step gap d >= 0.1, and a BRUE choice-error curve that is still
clearly nonzero at 2^11 iterations, so decay is measurable at 10^4 repetitions.
"""

import argparse

import numpy as np

from bruelab.domains import random_tree_mdp
from bruelab.oracle import build_oracle
from bruelab.planners import mcts_search
from bruelab.rng import RngStream

BUDGETS = [256, 512, 1024, 2048]


def error_curve(mdp, table, algorithm, reps, seed):
    best = set(table.optimal_actions(0, 3))
    errs = np.zeros(len(BUDGETS))
    for rep in range(reps):
        rng = RngStream.derive(seed, "scan", rep, algorithm)
        res = mcts_search(mdp, 0, algorithm, rng, BUDGETS)
        for j, b in enumerate(BUDGETS):
            errs[j] += res.recommend(b, "q", rng) not in best
    return errs / reps


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seeds", type=int, default=60)
    ap.add_argument("--reps", type=int, default=1000)
    args = ap.parse_args()
    for seed in range(args.seeds):
        mdp = random_tree_mdp(2, 2, 3, seed=seed, min_last_gap=0.1)
        table = build_oracle(mdp)
        d = table.params.d
        if d < 0.1:
            continue
        gap = table.regret(0, 3, 1 - table.optimal_action(0, 3))
        curve = error_curve(mdp, table, "brue", args.reps, seed)
        print(f"seed={seed:3d} d={d:.3f} root_gap={gap:.3f} brue={np.round(curve, 4).tolist()}")


if __name__ == "__main__":
    main()
