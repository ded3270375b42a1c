"""Small explicit MDPs for tests, sandboxes and theory checks."""

from __future__ import annotations

from typing import Optional, Sequence

from ..errors import ConfigError, ContractViolation
from ..mdp import EnumerableMdp
from ..rng import RngStream


class TableMdp(EnumerableMdp):
    """MDP given as ``transitions[s][a] = [(s2, prob, reward), ...]``.

    States missing from ``transitions`` (or mapped to ``[]``) are terminal.
    """

    def __init__(self, transitions: dict, horizon: int, start: Sequence = (0,),
                 players: Optional[dict] = None, name: str = "table",
                 reward_range: tuple[float, float] = (0.0, 1.0), config: Optional[dict] = None):
        if horizon < 0:
            raise ConfigError("horizon must be >= 0")
        self.transitions = {s: [list(o) for o in acts] for s, acts in transitions.items()}
        for s, acts in self.transitions.items():
            for a, outs in enumerate(acts):
                total = sum(p for _, p, _ in outs)
                if not outs or abs(total - 1.0) > 1e-12 or any(p <= 0 for _, p, _ in outs):
                    raise ConfigError(f"outcomes of ({s!r}, {a}) must be positive and sum to 1")
        self.horizon = horizon
        self.start = list(start)
        self.players = players or {}
        self.name = name
        self.reward_range = reward_range
        self._config = config

    def applicable_actions(self, s):
        return range(len(self.transitions.get(s, ())))

    def enumerate_outcomes(self, s, a):
        acts = self.transitions.get(s, ())
        if not 0 <= a < len(acts):
            raise ContractViolation(f"action {a} not applicable at state {s!r}")
        return [tuple(o) for o in acts[a]]

    def player(self, s) -> int:
        return self.players.get(s, 1)

    def start_states(self):
        return list(self.start)

    def config_dict(self) -> dict:
        if self._config is not None:
            return dict(self._config)
        return {"name": self.name, "horizon": self.horizon,
                "transitions": {str(s): acts for s, acts in sorted(self.transitions.items(), key=str)}}


def deterministic_bandit(rewards: Sequence[float]) -> TableMdp:
    """One decision, H = 1, action i pays rewards[i] for sure."""
    trans = {0: [[(i + 1, 1.0, float(r))] for i, r in enumerate(rewards)]}
    return TableMdp(trans, horizon=1, name="det-bandit",
                    reward_range=(min(0.0, *rewards), max(1.0, *rewards)))


def bandit_mdp(success_probs: Sequence[float]) -> TableMdp:
    """Bernoulli arms: action i pays 1 with probability success_probs[i]."""
    trans = {0: []}
    for p in success_probs:
        if p >= 1.0:
            trans[0].append([(1, 1.0, 1.0)])
        elif p <= 0.0:
            trans[0].append([(2, 1.0, 0.0)])
        else:
            trans[0].append([(1, float(p), 1.0), (2, 1.0 - float(p), 0.0)])
    return TableMdp(trans, horizon=1, name="bandit",
                    config={"name": "bandit", "probs": list(success_probs), "horizon": 1})


def chain_mdp(length: int, reward: float = 1.0, actions: int = 1) -> TableMdp:
    """Deterministic chain 0 -> 1 -> ... -> length; every action moves right."""
    trans = {i: [[(i + 1, 1.0, reward)] for _ in range(actions)] for i in range(length)}
    return TableMdp(trans, horizon=length, name="chain")


def _random_probs(rng: RngStream, n: int, floor: float) -> list[float]:
    raw = [floor + rng.random() for _ in range(n)]
    total = sum(raw)
    probs = [x / total for x in raw]
    probs[-1] = 1.0 - sum(probs[:-1])
    return probs


def _one_step_gap(acts: list) -> float:
    means = sorted(sum(p * r for _, p, r in outs) for outs in acts)
    return means[-1] - means[-2] if len(means) > 1 else float("inf")


def random_tree_mdp(K: int, B: int, H: int, seed: int, prob_floor: float = 0.5,
                    reward_scale: float = 1.0, min_last_gap: float = 0.0) -> TableMdp:
    """Tree-shaped MDP: every (state, action) has B fresh successor states.

    Rewards uniform in [0, reward_scale], outcome probabilities normalised from
    ``prob_floor + U[0,1)``; leaves at depth H are terminal.  States one step
    from the leaves are redrawn until their best and second-best expected
    rewards differ by at least ``min_last_gap``.
    """
    rng = RngStream.derive(seed, "random-tree", K, B, H)
    trans: dict = {}
    frontier = [0]
    next_id = 1
    for level in range(H):
        new_frontier = []
        for s in frontier:
            for _attempt in range(10_000):
                acts = []
                ids = []
                nid = next_id
                for _a in range(K):
                    probs = _random_probs(rng, B, prob_floor)
                    outs = []
                    for p in probs:
                        outs.append((nid, p, reward_scale * rng.random()))
                        ids.append(nid)
                        nid += 1
                    acts.append(outs)
                if level < H - 1 or _one_step_gap(acts) >= min_last_gap:
                    break
            else:
                raise ConfigError(f"could not reach a one-step gap of {min_last_gap}")
            trans[s] = acts
            new_frontier += ids
            next_id = nid
        frontier = new_frontier
    config = {"name": "random-tree", "K": K, "B": B, "H": H, "seed": seed,
              "prob_floor": prob_floor, "reward_scale": reward_scale}
    if min_last_gap:
        config["min_last_gap"] = min_last_gap
    return TableMdp(trans, horizon=H, name="random-tree", config=config)


def random_mdp(n_states: int, K: int, B: int, H: int, seed: int,
               terminal_frac: float = 0.2) -> TableMdp:
    """General random MDP: successors may merge, some states are terminal."""
    rng = RngStream.derive(seed, "random-mdp", n_states, K, B, H)
    trans: dict = {}
    for s in range(n_states):
        if s > 0 and rng.random() < terminal_frac:
            continue
        acts = []
        for _a in range(1 + rng.integers(K)):
            n_out = 1 + rng.integers(B)
            succ: list[int] = []
            while len(succ) < n_out:
                cand = rng.integers(n_states)
                if cand not in succ:
                    succ.append(cand)
            probs = _random_probs(rng, n_out, 0.2)
            acts.append([(s2, p, rng.random()) for s2, p in zip(succ, probs)])
        trans[s] = acts
    return TableMdp(trans, horizon=H, name="random-mdp",
                    config={"name": "random-mdp", "n_states": n_states, "K": K, "B": B,
                            "H": H, "seed": seed, "terminal_frac": terminal_frac})


# picked with scripts/select_tiny_instance.py: d ~ 0.148, root gap ~ 0.083, so
# BRUE still errs ~1.5% of the time at 2^11 iterations
TINY_SEED = 27
TINY_MIN_GAP = 0.1


def tiny_benchmark_mdp() -> TableMdp:
    """The fixed K=2, B=2, H=3 instance used by the sandbox and rate checks."""
    return random_tree_mdp(2, 2, 3, seed=TINY_SEED, min_last_gap=TINY_MIN_GAP)
