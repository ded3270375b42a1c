"""Bound calculators (all in natural-log space) and Monte-Carlo concentration checks."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
from numba import njit
from scipy import stats

from .errors import ConfigError, DegenerateInstanceError
from .rng import RngStream, nb_random

LOG16 = math.log(16.0)
LOG24 = math.log(24.0)


def log_factorial(n: int) -> float:
    return math.lgamma(n + 1)


def _sum_log_factorials(upto: int) -> float:
    """sum_{i=1}^{upto} ln(i!)"""
    return sum(log_factorial(i) for i in range(1, upto + 1))


def _check(p: float, d: float, K: int, H: int) -> None:
    if not 0.0 < p <= 1.0:
        raise ConfigError(f"p must lie in (0, 1], got {p}")
    if d == 0.0:
        raise DegenerateInstanceError(
            "d = 0: some one-step decision has tied optimal actions, so the bound constants are undefined")
    if not 0.0 < d <= 1.0:
        raise ConfigError(f"d must lie in (0, 1], got {d}")
    if K < 2 or H < 1:
        raise ConfigError(f"need K >= 2 and H >= 1, got K={K}, H={H}")


@dataclass(frozen=True)
class BoundConstants:
    p: float
    d: float
    K: int
    H: int
    log_c: float
    log_c_prime: float
    log_c_h: tuple              # h = 1..H
    log_c_h_prime: tuple        # closed form, h = 1..H
    log_c1_prime_basis: float   # the induction-basis value ln(d^2 / 2)
    log_transition_n: float     # ln(ln(c) / c')

    @property
    def c(self) -> float:
        return math.exp(self.log_c) if self.log_c < 700 else math.inf

    @property
    def c_prime(self) -> float:
        return math.exp(self.log_c_prime)

    @property
    def transition_n(self) -> float:
        return math.exp(self.log_transition_n) if self.log_transition_n < 700 else math.inf

    def as_dict(self) -> dict:
        d = asdict(self)
        d["log_c_h"] = list(self.log_c_h)
        d["log_c_h_prime"] = list(self.log_c_h_prime)
        d["transition_n"] = self.transition_n
        return d


def log_c_theorem(p: float, d: float, K: int, H: int) -> float:
    return (math.log(4.0) + (3 * H * H - 2 * H) * math.log(K) + 3 * log_factorial(H)
            + 4 * _sum_log_factorials(H - 1) + (H - 1) * LOG24 + (H - 1) ** 2 * LOG16
            - (2 * H * H - 4 * H + 2) * math.log(d) - (3 * H * H - 3 * H) * math.log(p))


def log_c_prime_theorem(p: float, d: float, K: int, H: int) -> float:
    return (math.log(3.0) + (2 * H - 2) * math.log(d) + (2 * H - 1) * math.log(p)
            - math.log(2.0 * H) - (H - 1) * LOG16 - 2 * log_factorial(H) - 2 * H * math.log(K))


def log_c_level(p: float, d: float, K: int, H: int, h: int) -> float:
    return ((2 * H * h + h * h - 2 * H - 1) * math.log(K) + 3 * log_factorial(h)
            + 4 * _sum_log_factorials(h - 1) + (h - 1) * LOG24 + (h - 1) ** 2 * LOG16
            - 2 * (h - 1) ** 2 * math.log(d) - (2 * H * h + h * h - 2 * H - h) * math.log(p))


def log_c_level_prime(p: float, d: float, K: int, H: int, h: int) -> float:
    return (math.log(3.0) + 2 * (h - 1) * math.log(d) + (H + h - 1) * math.log(p)
            - (h - 1) * LOG16 - 2 * log_factorial(h) - (H + h - 1) * math.log(K))


def theorem1_constants(p: float, d: float, K: int, H: int) -> BoundConstants:
    _check(p, d, K, H)
    log_c = log_c_theorem(p, d, K, H)
    log_cp = log_c_prime_theorem(p, d, K, H)
    levels = lemma1_constants(p, d, K, H)
    return BoundConstants(p=p, d=d, K=K, H=H, log_c=log_c, log_c_prime=log_cp,
                          log_c_h=levels["log_c_h"], log_c_h_prime=levels["log_c_h_prime"],
                          log_c1_prime_basis=levels["log_c1_prime_basis"],
                          log_transition_n=math.log(log_c) - log_cp)


def lemma1_constants(p: float, d: float, K: int, H: int) -> dict:
    """Per-level ln c_h and ln c_h' for h = 1..H, plus the basis value ln(d^2/2)."""
    _check(p, d, K, H)
    return {
        "log_c_h": tuple(log_c_level(p, d, K, H, h) for h in range(1, H + 1)),
        "log_c_h_prime": tuple(log_c_level_prime(p, d, K, H, h) for h in range(1, H + 1)),
        "log_c1_prime_basis": 2 * math.log(d) - math.log(2.0),
    }


def theorem1_exact(p, d, K: int, H: int) -> tuple[Fraction, Fraction]:
    """(c, c') as exact rationals of the given (float or rational) p and d.

    Independent of the log-space route; practical for small H only.
    """
    _check(float(p), float(d), K, H)
    p, d = Fraction(p), Fraction(d)
    prod = 1
    for h in range(1, H):
        prod *= math.factorial(h) ** 4
    c = (Fraction(4 * K ** (3 * H * H - 2 * H) * math.factorial(H) ** 3 * prod
                  * 24 ** (H - 1) * 16 ** ((H - 1) ** 2))
         / (d ** (2 * H * H - 4 * H + 2) * p ** (3 * H * H - 3 * H)))
    c_prime = (3 * d ** (2 * H - 2) * p ** (2 * H - 1)
               / (2 * H * 16 ** (H - 1) * math.factorial(H) ** 2 * K ** (2 * H)))
    return c, c_prime


def log_fraction(x: Fraction) -> float:
    return math.log(x.numerator) - math.log(x.denominator)


@dataclass(frozen=True)
class FlatBounds:
    n: int
    log_naive: float
    log_crafty: float
    crafty_threshold: float

    @property
    def naive(self) -> float:
        return math.exp(min(self.log_naive, 700.0))

    @property
    def crafty(self) -> float:
        return math.exp(min(self.log_crafty, 700.0))


def naive_crafty_bounds(K: int, B: int, H: int, d: float, n: int) -> FlatBounds:
    """Expected-simple-regret bounds of NaiveUniform and CraftyUniform after n rollouts."""
    if d <= 0:
        raise DegenerateInstanceError("d = 0: flat-policy bounds are undefined")
    log_arms = (B ** H) * math.log(K)             # ln K^(B^H)
    sweeps = math.floor(n / math.exp(log_arms)) if log_arms < 700 else 0
    log_naive = math.log(H) + log_arms - sweeps * d * d / (2.0 * H * H)
    log_crafty = (math.log(4.0 * H) + log_arms
                  - n * d * d / (4.0 * math.exp(2 * H * math.log(K)) * H * H))
    threshold = (K * K * B) ** H * 4.0 * (H / d) ** 2 * math.log(K)
    return FlatBounds(n=n, log_naive=log_naive, log_crafty=log_crafty, crafty_threshold=threshold)


# --- concentration checks -----------------------------------------------


def log_azuma_bound(h: float, delta: float, c_p: float, c_e: float, t: int,
                    beta: Optional[float] = None) -> float:
    """ln of the tail bound for the sum of the first t samples.

    ``beta=None`` is the lemma's own form; a beta in (0, 1) gives the
    alternative family with a different leading coefficient.
    """
    if beta is None:
        lead = 1.0 + c_p * 2.0 * h * h / (delta * delta * c_e * c_e)
        rate = 3.0 * delta * delta * c_e / (2.0 * h * h)
    else:
        if not 0.0 < beta < 1.0:
            raise ConfigError("beta must lie in (0, 1)")
        lead = 1.0 + c_p / (c_e * (1.0 - beta)) * math.exp(-c_e * (1.0 - beta) / (2.0 * h * h))
        rate = 3.0 * delta * delta * c_e * beta / (2.0 * h * h)
    return math.log(lead) - rate * t


def log_azuma_window_bound(h: float, delta: float, c_p: float, c_e: float, t: int,
                           alpha: float) -> float:
    """ln of the partial-sum (last ceil(alpha t) samples) tail bound; alpha = 1 falls back."""
    if alpha >= 1.0:
        return log_azuma_bound(h, delta, c_p, c_e, t)
    lead = 1.0 + c_p / (c_e * (1.0 - alpha)) * math.exp(-c_e * (1.0 - alpha) ** 2 * t)
    return math.log(lead) - 3.0 * delta * delta * c_e * alpha * t / (2.0 * h * h)


@dataclass(frozen=True)
class AzumaScenario:
    h: float = 1.0
    delta: float = 0.25
    c_p: float = 0.0
    c_e: float = 1.0
    alpha: float = 1.0

    @property
    def mu(self) -> float:
        return self.h / 2.0

    def validate(self) -> None:
        if self.h <= 0:
            raise ConfigError("h must be positive")
        if not 0.0 < self.delta <= self.h / 2.0:
            raise ConfigError(f"delta must lie in (0, h/2], got {self.delta}")
        if self.c_p < 0 or not 0.0 < self.c_e <= 1.0:
            raise ConfigError("need c_p >= 0 and 0 < c_e <= 1")
        if not 0.0 < self.alpha <= 1.0:
            raise ConfigError("alpha must lie in (0, 1]")

    def contamination_prob(self, i: int) -> float:
        return min(1.0, self.c_p * math.exp(-self.c_e * i))


@njit(cache=True)
def _azuma_counts(h, c_p, c_e, deltas, alphas, t_grid, trials, st):
    """Tail-event counts[d, a, t] for the stream generator described in azuma_check."""
    t_max = t_grid[t_grid.shape[0] - 1]
    mu = h / 2.0
    counts = np.zeros((deltas.shape[0], alphas.shape[0], t_grid.shape[0]), np.int64)
    prefix = np.zeros(t_max + 1)
    q = np.empty(t_max + 1)
    for i in range(1, t_max + 1):
        q[i] = min(1.0, c_p * np.exp(-c_e * i))
    for _ in range(trials):
        for i in range(1, t_max + 1):
            u = nb_random(st)
            if q[i] > 0.0 and nb_random(st) < q[i]:
                x = mu + u * (h - mu)    # shifted: uniform on [h/2, h]
            else:
                x = u * h                # base: uniform on [0, h], mean mu
            prefix[i] = prefix[i - 1] + x
        for k in range(t_grid.shape[0]):
            t = t_grid[k]
            for ai in range(alphas.shape[0]):
                m = np.int64(np.ceil(alphas[ai] * t - 1e-9))
                if m < 1:
                    m = 1
                if m > t:
                    m = t
                window = prefix[t] - prefix[t - m]
                for di in range(deltas.shape[0]):
                    if window >= m * (mu + deltas[di]):
                        counts[di, ai, k] += 1
    return counts


def clopper_pearson(k: int, n: int, level: float = 0.99) -> tuple[float, float]:
    """One-sided (lower, upper) confidence bounds for a binomial proportion."""
    lower = 0.0 if k == 0 else float(stats.beta.ppf(1.0 - level, k, n - k + 1))
    upper = 1.0 if k == n else float(stats.beta.ppf(level, k + 1, n - k))
    return lower, upper


@dataclass(frozen=True)
class AzumaRow:
    h: float
    delta: float
    c_p: float
    c_e: float
    alpha: float
    t: int
    trials: int
    hits: int
    empirical_tail: float
    ci_lower: float
    ci_upper: float
    analytic_bound: float
    log_bound: float

    @property
    def violation(self) -> bool:
        # significant at the 99% level: the tail is provably above the bound
        return self.ci_lower > 0.0 and math.log(self.ci_lower) > self.log_bound

    @property
    def point_above_bound(self) -> bool:
        return self.hits > 0 and math.log(self.empirical_tail) > self.log_bound

    def as_dict(self) -> dict:
        d = asdict(self)
        d["violation"] = self.violation
        return d


def azuma_check(h: float, c_p: float, c_e: float, deltas: Sequence[float], alphas: Sequence[float],
                t_grid: Sequence[int], trials: int, seed: int = 0, level: float = 0.99) -> list[AzumaRow]:
    """Empirical tails of contaminated streams against the analytic bounds.

    Each trial draws X_1..X_T: with probability min(1, c_p e^{-c_e i}) sample i
    comes from U[h/2, h], otherwise from U[0, h] (mean h/2).  All deltas and
    alphas are scored on the same streams.  The tail event for window
    fraction alpha is "mean of the last ceil(alpha t) samples >= h/2 + delta";
    alpha = 1 is the plain sum of the first t samples.
    """
    for delta in deltas:
        for alpha in alphas:
            AzumaScenario(h, delta, c_p, c_e, alpha).validate()
    if trials < 1:
        raise ConfigError("trials must be >= 1")
    t_arr = np.asarray(sorted(set(int(t) for t in t_grid)), dtype=np.int64)
    rng = RngStream.derive(seed, "azuma", float(h), float(c_p), float(c_e))
    st = rng.state()
    counts = _azuma_counts(float(h), float(c_p), float(c_e), np.asarray(deltas, float),
                           np.asarray(alphas, float), t_arr, int(trials), st)
    rows = []
    for di, delta in enumerate(deltas):
        for ai, alpha in enumerate(alphas):
            for k, t in enumerate(t_arr):
                hits = int(counts[di, ai, k])
                lo, hi = clopper_pearson(hits, trials, level)
                lb = log_azuma_window_bound(h, delta, c_p, c_e, int(t), alpha)
                rows.append(AzumaRow(h=h, delta=delta, c_p=c_p, c_e=c_e, alpha=alpha, t=int(t),
                                     trials=trials, hits=hits, empirical_tail=hits / trials,
                                     ci_lower=lo, ci_upper=hi, analytic_bound=math.exp(min(lb, 700.0)),
                                     log_bound=lb))
    return rows


@dataclass
class AzumaGrid:
    hs: Sequence[float] = (1.0, 2.0)
    delta_fracs: Sequence[float] = (0.25, 0.5)      # delta = frac * h
    c_es: Sequence[float] = (0.1, 1.0)
    c_ps: Sequence[float] = (0.0, 1.0, 10.0)
    alphas: Sequence[float] = (0.5, 1.0)
    t_grid: Sequence[int] = (10, 50, 100, 500)
    trials: int = 100_000
    seed: int = 0
    extra: dict = field(default_factory=dict)


def azuma_grid(grid: AzumaGrid) -> list[AzumaRow]:
    rows = []
    for h in grid.hs:
        for c_e in grid.c_es:
            for c_p in grid.c_ps:
                rows += azuma_check(h, c_p, c_e, [f * h for f in grid.delta_fracs], list(grid.alphas),
                                    grid.t_grid, grid.trials, grid.seed)
    return rows
