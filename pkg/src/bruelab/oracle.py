"""Exact finite-horizon values by backward induction (expectimax / minimax).

Tables are indexed by the dense state index of a :class:`TabularModel` and by
steps-to-go ``h``.  ``covered[h, i]`` marks the pairs that are reachable from
the declared start states with exactly ``h`` steps left; lookups outside the
covered set raise :class:`MissingOracleEntry`.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import CapabilityError, MissingOracleEntry, ResourceCapError
from .mdp import GenerativeMdp
from .tabular import DEFAULT_STATE_CAP, TabularModel, compile_tabular, tabular_of

CACHE_VERSION = 1
CACHE_ENV = "BRUELAB_CACHE_DIR"


@dataclass(frozen=True)
class BoundParams:
    K: int
    B: int
    H: int
    p: float
    d: float
    degenerate: bool = False   # d == 0: some one-step decision has tied optima

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(eq=False)
class OracleTable:
    model: TabularModel
    horizon: int
    q: dict                    # h -> (S, K) array, NaN for inapplicable actions
    v: np.ndarray              # (H+1, S)
    covered: np.ndarray        # (H+1, S) bool
    params: BoundParams
    native_q: Optional[dict] = None   # h -> (S, K) in reporting units, when exact
    native_scale: float = 1.0
    meta: dict = field(default_factory=dict)

    def _locate(self, s, h: int) -> int:
        if not 0 <= h <= self.horizon:
            raise MissingOracleEntry(f"steps-to-go {h} outside [0, {self.horizon}]")
        try:
            i = self.model.index_of(s)
        except KeyError:
            raise MissingOracleEntry(f"state {s!r} unknown to the oracle") from None
        if not 0 <= i < self.model.num_states or not self.covered[h, i]:
            raise MissingOracleEntry(f"oracle does not cover (state={s!r}, h={h})")
        return i

    def _q_row(self, h: int, i: int) -> np.ndarray:
        if h not in self.q:
            raise MissingOracleEntry(f"Q layer h={h} was not kept")
        return self.q[h][i, : self.model.n_actions[i]]

    def v_value(self, s, h: int) -> float:
        return float(self.v[h, self._locate(s, h)])

    def q_values(self, s, h: int) -> np.ndarray:
        return self._q_row(h, self._locate(s, h)).copy()

    def q_value(self, s, h: int, a: int) -> float:
        row = self.q_values(s, h)
        if not 0 <= a < len(row):
            raise MissingOracleEntry(f"action {a} not applicable at {s!r}")
        return float(row[a])

    def optimal_actions(self, s, h: int) -> list[int]:
        i = self._locate(s, h)
        row = self.model.sign[i] * self._q_row(h, i)
        return [int(a) for a in np.flatnonzero(row == row.max())]

    def optimal_action(self, s, h: int) -> int:
        return self.optimal_actions(s, h)[0]

    def regret(self, s, h: int, a: int) -> float:
        """V_h(s) - Q_h(s, a) seen from the mover at ``s`` (never negative)."""
        i = self._locate(s, h)
        row = self._q_row(h, i)
        if not 0 <= a < len(row):
            raise MissingOracleEntry(f"action {a} not applicable at {s!r}")
        sg = self.model.sign[i]
        return float(sg * self.v[h, i] - sg * row[a])

    def regret_native(self, s, h: int, a: int) -> float:
        """Regret in the domain's reporting units."""
        if self.native_q is not None and h in self.native_q:
            i = self._locate(s, h)
            row = self.native_q[h][i, : self.model.n_actions[i]]
            best = row.max() if self.model.sign[i] > 0 else row.min()
            return float(self.model.sign[i] * (best - row[a]))
        return self.regret(s, h, a) * self.native_scale


def reachability(model: TabularModel, starts: np.ndarray, H: int) -> np.ndarray:
    """``reach[t, i]``: state i can be occupied after exactly t steps."""
    S = model.num_states
    reach = np.zeros((H + 1, S), dtype=bool)
    reach[0, starts] = True
    K, B = model.max_actions, model.max_outcomes
    valid = (np.arange(K)[None, :, None] < model.n_actions[:, None, None]) & \
            (np.arange(B)[None, None, :] < model.n_out[:, :, None])
    for t in range(H):
        idx = np.flatnonzero(reach[t])
        if idx.size == 0:
            break
        succ = model.next_state[idx][valid[idx]]
        reach[t + 1, succ] = True
    return reach


def _backup(model: TabularModel, v_prev: np.ndarray, act_mask: np.ndarray) -> np.ndarray:
    # outcomes summed in listed order, matching a plain loop over enumerate_outcomes
    q = np.zeros(act_mask.shape)
    for j in range(model.max_outcomes):
        q = q + model.prob[:, :, j] * (model.reward[:, :, j] + v_prev[model.next_state[:, :, j]])
    return np.where(act_mask, q, np.nan)


def _values(model: TabularModel, q: np.ndarray) -> np.ndarray:
    signed = model.sign[:, None] * q
    best = np.where(model.n_actions > 0, np.nanmax(np.where(np.isnan(signed), -np.inf, signed), axis=1), 0.0)
    return model.sign * best


def _one_step_gaps(model: TabularModel, q1: np.ndarray, mask: np.ndarray) -> np.ndarray:
    rows = np.flatnonzero(mask & (model.n_actions >= 2))
    if rows.size == 0:
        return np.array([np.inf])
    signed = model.sign[rows, None] * q1[rows]
    signed = np.where(np.isnan(signed), -np.inf, signed)
    top2 = -np.sort(-signed, axis=1)[:, :2]
    return top2[:, 0] - top2[:, 1]


def _params(model: TabularModel, H: int, reach: np.ndarray, q1: Optional[np.ndarray]) -> BoundParams:
    live = reach[: max(H, 1)].any(axis=0)
    probs = model.prob[live]
    positive = probs[probs > 0]
    p = float(positive.min()) if positive.size else 1.0
    K = int(model.n_actions[live].max()) if live.any() else 0
    B = int(model.n_out[live].max()) if live.any() else 0
    if q1 is None or H < 1:
        return BoundParams(K=K, B=B, H=H, p=p, d=0.0, degenerate=True)
    gaps = _one_step_gaps(model, q1, reach[H - 1])
    d = float(gaps.min())
    if not np.isfinite(d):
        d = 0.0
    return BoundParams(K=K, B=B, H=H, p=p, d=d, degenerate=d <= 0.0)


def build_oracle(mdp: GenerativeMdp, H: Optional[int] = None, start_states: Optional[list] = None,
                 keep: str = "all", cap: int = DEFAULT_STATE_CAP) -> OracleTable:
    """Backward induction over every (state, h) reachable from the starts.

    ``keep='top'`` stores Q only for h = H (V is always kept for every h),
    which is what root-error measurement needs on large grids.
    """
    if not mdp.enumerable:
        raise CapabilityError(f"{type(mdp).__name__} cannot enumerate outcomes; no oracle possible")
    if keep not in ("all", "top"):
        raise ValueError("keep must be 'all' or 'top'")
    H = mdp.horizon if H is None else int(H)
    if start_states is None:
        model = tabular_of(mdp)
        starts = [model.index_of(s) for s in mdp.start_states()]
    else:
        model = tabular_of(mdp)
        try:
            starts = [model.index_of(s) for s in start_states]
        except KeyError:
            model = compile_tabular(mdp, start_states=list(start_states), cap=cap)
            starts = [model.index_of(s) for s in start_states]
    S = model.num_states
    if S * (H + 1) > 50 * cap:
        raise ResourceCapError("oracle cells (states x layers)", S * (H + 1), 50 * cap)
    starts = np.asarray(starts, dtype=np.int64)
    reach = reachability(model, starts, H)
    covered = reach[::-1].copy()   # covered[h] = reach[H - h]
    act_mask = np.arange(model.max_actions)[None, :] < model.n_actions[:, None]
    v = np.zeros((H + 1, S))
    q: dict = {}
    q1 = None
    for h in range(1, H + 1):
        qh = _backup(model, v[h - 1], act_mask)
        v[h] = _values(model, qh)
        if h == 1:
            q1 = qh
        if keep == "all" or h == H:
            q[h] = qh
    params = _params(model, H, reach, q1)
    return OracleTable(model=model, horizon=H, q=q, v=v, covered=covered, params=params,
                       native_scale=getattr(mdp, "native_scale", 1.0),
                       meta={"domain": mdp.config_dict(), "keep": keep})


def extract_params(mdp: GenerativeMdp, oracle: OracleTable) -> BoundParams:
    """(K, B, H, p, d) of the instance the oracle was built for."""
    return oracle.params


def minimax_oracle(spec, cap: int = 1 << 22) -> OracleTable:
    """Exact minimax over a whole game tree, with integer payoffs kept for reporting."""
    from .domains.gametree import GameTreeMdp, num_nodes

    n = num_nodes(spec.branching, spec.depth)
    if n > cap:
        raise ResourceCapError("game-tree nodes", n, cap)
    mdp = GameTreeMdp(spec)
    table = build_oracle(mdp, spec.depth, keep="all")
    # integer minimax, bottom-up over heap levels
    B, D = spec.branching, spec.depth
    raw = mdp.payoffs().astype(np.int64)
    node_val = raw.copy()
    first = mdp.first_leaf
    start = first
    for d in range(D - 1, -1, -1):
        width = B ** d
        start -= width
        kids = node_val[start * B + 1:(start + width) * B + 1].reshape(width, B)
        node_val[start:start + width] = kids.max(axis=1) if d % 2 == 0 else kids.min(axis=1)
    native: dict = {}
    S = mdp.n_nodes
    internal = np.arange(first)
    child = internal[:, None] * B + 1 + np.arange(B)[None, :]
    for h in range(1, D + 1):
        nq = np.full((S, B), np.nan)
        depth = D - h
        lo = num_nodes(B, depth - 1) if depth > 0 else 0
        hi = num_nodes(B, depth)
        nq[lo:hi] = node_val[child[lo:hi]]
        native[h] = nq
    table.native_q = native
    table.meta["root_value_native"] = int(node_val[0])
    return table


# --- cache ---------------------------------------------------------------


def cache_dir() -> Path:
    return Path(os.environ.get(CACHE_ENV, Path.home() / ".cache" / "bruelab"))


def config_hash(config: dict) -> str:
    text = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


def cache_path(mdp: GenerativeMdp, H: int, keep: str = "all", directory: Optional[Path] = None) -> Path:
    directory = cache_dir() if directory is None else Path(directory)
    return directory / f"{mdp.name}-{config_hash(mdp.config_dict())}-H{H}-{keep}.v{CACHE_VERSION}.npz"


def save_oracle(table: OracleTable, path: Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    arrays = {"v": table.v, "covered": table.covered}
    for h, qh in table.q.items():
        arrays[f"q_{h}"] = qh
    if table.native_q is not None:
        for h, qh in table.native_q.items():
            arrays[f"nq_{h}"] = qh
    header = {"version": CACHE_VERSION, "horizon": table.horizon, "params": table.params.as_dict(),
              "native_scale": table.native_scale, "meta": table.meta}
    arrays["header"] = np.frombuffer(json.dumps(header, sort_keys=True).encode("utf-8"), dtype=np.uint8)
    tmp = path.with_name(path.name + ".tmp.npz")
    np.savez(tmp, **arrays)
    os.replace(tmp, path)


def load_oracle(path: Path, model: TabularModel) -> Optional[OracleTable]:
    """Load a cached table for ``model``; None if missing or from another schema."""
    path = Path(path)
    if not path.exists():
        return None
    with np.load(path) as data:
        header = json.loads(bytes(data["header"]).decode("utf-8"))
        if header.get("version") != CACHE_VERSION:
            return None
        v = data["v"]
        if v.shape[1] != model.num_states:
            return None
        q = {int(k[2:]): data[k] for k in data.files if k.startswith("q_")}
        nq = {int(k[3:]): data[k] for k in data.files if k.startswith("nq_")} or None
        covered = data["covered"]
    return OracleTable(model=model, horizon=header["horizon"], q=q, v=v, covered=covered,
                       params=BoundParams(**header["params"]), native_q=nq,
                       native_scale=header["native_scale"], meta=header["meta"])


def cached_oracle(mdp: GenerativeMdp, H: Optional[int] = None, keep: str = "all",
                  directory: Optional[Path] = None) -> OracleTable:
    """build_oracle with a file cache keyed by (domain, config hash, H)."""
    H = mdp.horizon if H is None else H
    path = cache_path(mdp, H, keep, directory)
    table = load_oracle(path, tabular_of(mdp))
    if table is None:
        table = build_oracle(mdp, H, keep=keep)
        try:
            save_oracle(table, path)
        except OSError:
            pass   # read-only cache dir: still usable, just not persisted
    return table


def bellman_residual(mdp: GenerativeMdp, table: OracleTable) -> float:
    """Largest |Q_h(s,a) - E[r + V_{h-1}(s')]| over stored covered cells, via enumerate_outcomes."""
    model = table.model
    worst = 0.0
    for h, qh in table.q.items():
        for i in np.flatnonzero(table.covered[h]):
            s = model.states[i]
            for a in range(int(model.n_actions[i])):
                total = 0.0
                for s2, p, r in mdp.enumerate_outcomes(s, a):
                    total += p * (r + table.v[h - 1, model.index_of(s2)])
                worst = max(worst, abs(total - qh[i, a]))
            if model.n_actions[i] == 0:
                worst = max(worst, abs(table.v[h, i]))
    worst = max(worst, float(np.abs(table.v[0]).max(initial=0.0)))
    return worst
