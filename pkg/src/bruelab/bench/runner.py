"""Benchmark runs: one decision per (trial, algorithm, budget), scored by the oracle.

Every trial is independent: its initial state (or tree), its search streams
and its recommendation streams are all derived from ``(seed, trial, ...)``,
so trials can be spread across processes without changing any number.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..domains import gametree_mdp, random_tree_mdp, sailing_mdp, tiny_benchmark_mdp
from ..domains.gametree import GameTreeSpec
from ..errors import InsufficientBudgetError
from ..oracle import OracleTable, build_oracle, cached_oracle, minimax_oracle
from ..planners.config import as_planner
from ..planners.flat import enumerate_flat_policies, flat_search
from ..planners.search import mcts_search
from ..rng import RngStream
from .config import ExperimentConfig


@dataclass(frozen=True)
class BenchmarkRecord:
    domain: str
    algorithm: str
    budget: int
    trial: int
    initial_state: int
    action: int
    error: float        # V(s0) - Q(s0, action) in the domain's reporting units
    wall_time: float    # seconds for the whole anytime search this row came from


def domain_id(cfg: ExperimentConfig) -> str:
    if cfg.domain == "sailing":
        return f"sailing-{cfg.sailing.grid_size}"
    if cfg.domain == "gametree":
        return f"gametree-B{cfg.gametree.branching}-D{cfg.gametree.depth}"
    sb = cfg.sandbox
    if sb.instance_seed is None:
        return "sandbox-tiny"
    return f"sandbox-K{sb.K}-B{sb.B}-H{sb.H}-s{sb.instance_seed}"


def sandbox_mdp(cfg: ExperimentConfig):
    sb = cfg.sandbox
    if sb.instance_seed is None:
        return tiny_benchmark_mdp()
    return random_tree_mdp(sb.K, sb.B, sb.H, seed=sb.instance_seed, min_last_gap=sb.min_last_gap)


def _recommend(result, budget: int, mode: str, rng: RngStream, n_actions: int) -> int:
    try:
        return result.recommend(budget, mode, rng)
    except InsufficientBudgetError:
        # no root action evaluated yet: fall back to a uniform guess
        return rng.child("fallback", int(budget)).choice_index(n_actions)


def _score_algorithms(cfg: ExperimentConfig, mdp, oracle: OracleTable, s0, trial: int,
                      domain: str, policies=None) -> list:
    records = []
    H = mdp.horizon
    n_actions = len(mdp.applicable_actions(s0))
    for spec in cfg.algorithms:
        planner = as_planner(spec)
        label = planner.label()
        rng = RngStream.derive(cfg.seed, "search", trial, label)
        start = time.perf_counter()
        if planner.family == "flat":
            run = flat_search(mdp, s0, cfg.budgets, rng, planner.algorithm == "crafty",
                              policies=policies)
            picks = [run.recommend(b, rng) for b in cfg.budgets]
        else:
            result = mcts_search(mdp, s0, planner, rng, cfg.budgets)
            picks = [_recommend(result, b, planner.recommend, rng, n_actions) for b in cfg.budgets]
        elapsed = time.perf_counter() - start
        for b, a in zip(cfg.budgets, picks):
            records.append(BenchmarkRecord(domain, label, int(b), trial, int(s0), int(a),
                                           oracle.regret_native(s0, H, a), elapsed))
    return records


# --- per-process state -----------------------------------------------------

_WORKER: dict = {}


def _setup(cfg: ExperimentConfig) -> None:
    _WORKER.clear()
    _WORKER["cfg"] = cfg
    if cfg.domain == "sailing":
        mdp = sailing_mdp(cfg.sailing)
        _WORKER["mdp"] = mdp
        _WORKER["oracle"] = cached_oracle(mdp, keep="top")
        _WORKER["starts"] = mdp.start_states()
    elif cfg.domain == "sandbox":
        mdp = sandbox_mdp(cfg)
        _WORKER["mdp"] = mdp
        _WORKER["oracle"] = build_oracle(mdp)
        if any(as_planner(a).family == "flat" for a in cfg.algorithms):
            _WORKER["policies"] = enumerate_flat_policies(mdp, mdp.start_states()[0])


def tree_seed_for(seed: int, trial: int) -> int:
    return RngStream.derive(seed, "tree", trial).next_u64()


def run_trial(trial: int) -> list:
    cfg: ExperimentConfig = _WORKER["cfg"]
    domain = domain_id(cfg)
    if cfg.domain == "sailing":
        starts = _WORKER["starts"]
        s0 = starts[RngStream.derive(cfg.seed, "initial", trial).choice_index(len(starts))]
        return _score_algorithms(cfg, _WORKER["mdp"], _WORKER["oracle"], s0, trial, domain)
    if cfg.domain == "gametree":
        spec = GameTreeSpec(cfg.gametree.branching, cfg.gametree.depth, tree_seed_for(cfg.seed, trial))
        return _score_algorithms(cfg, gametree_mdp(spec), minimax_oracle(spec), 0, trial, domain)
    mdp = _WORKER["mdp"]
    return _score_algorithms(cfg, mdp, _WORKER["oracle"], mdp.start_states()[0], trial, domain,
                             policies=_WORKER.get("policies"))


def _run_chunk(args) -> list:
    cfg, trials = args
    if _WORKER.get("cfg") is not cfg:
        _setup(cfg)
    out = []
    for t in trials:
        out += run_trial(t)
    return out


def run_bench(cfg: ExperimentConfig, jobs: Optional[int] = None) -> list:
    """All detail records for ``cfg``, in canonical order."""
    cfg.validate()
    jobs = cfg.jobs if jobs is None else jobs
    trials = list(range(cfg.trials))
    if jobs <= 1:
        _setup(cfg)
        records = []
        for t in trials:
            records += run_trial(t)
    else:
        chunks = [trials[i::jobs] for i in range(jobs)]
        records = []
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for part in pool.map(_run_chunk, [(cfg, c) for c in chunks if c]):
                records += part
    return sort_records(records)


def run_sailing_bench(cfg: ExperimentConfig, jobs: Optional[int] = None) -> list:
    return run_bench(cfg, jobs)


def run_gametree_bench(cfg: ExperimentConfig, jobs: Optional[int] = None) -> list:
    return run_bench(cfg, jobs)


def run_sandbox(cfg: ExperimentConfig, jobs: Optional[int] = None) -> list:
    return run_bench(cfg, jobs)


def sort_records(records: list) -> list:
    return sorted(records, key=lambda r: (r.domain, r.algorithm, r.budget, r.trial))


@dataclass(frozen=True)
class SummaryRow:
    domain: str
    algorithm: str
    budget: int
    mean_error: float
    std_error: float
    count: int


def summarize(records: list) -> list:
    groups: dict = {}
    for r in records:
        groups.setdefault((r.domain, r.algorithm, r.budget), []).append(r.error)
    out = []
    for (domain, alg, budget), errs in sorted(groups.items()):
        arr = np.asarray(errs, dtype=float)
        sem = float(arr.std(ddof=1) / np.sqrt(arr.size)) if arr.size > 1 else 0.0
        out.append(SummaryRow(domain, alg, budget, float(arr.mean()), sem, int(arr.size)))
    return out


def error_matrix(records: list, algorithm: str, budgets: list) -> np.ndarray:
    """(len(budgets), trials) array of errors for one algorithm."""
    by_key = {(r.budget, r.trial): r.error for r in records if r.algorithm == algorithm}
    trials = sorted({t for _, t in by_key})
    return np.array([[by_key[(b, t)] for t in trials] for b in budgets])


def action_matrix(records: list, algorithm: str, budgets: list) -> np.ndarray:
    by_key = {(r.budget, r.trial): r.action for r in records if r.algorithm == algorithm}
    trials = sorted({t for _, t in by_key})
    return np.array([[by_key[(b, t)] for t in trials] for b in budgets])
