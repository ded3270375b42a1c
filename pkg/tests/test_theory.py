import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bruelab.errors import ConfigError, DegenerateInstanceError
from bruelab.theory import (AzumaScenario, azuma_check, clopper_pearson, lemma1_constants,
                            log_azuma_bound, log_azuma_window_bound, log_fraction,
                            naive_crafty_bounds, theorem1_constants, theorem1_exact)

GRID = [(p, d, K) for p in (0.1, 0.3, 0.5, 1.0) for d in (0.05, 0.2, 0.5) for K in (2, 3)]


@pytest.mark.parametrize("d", [0.05, 0.3, 1.0])
def test_h1_constants(d):
    c, cp = theorem1_exact(Fraction(1, 2), d, 2, 1)
    assert c == 8 and cp == Fraction(3, 16)
    bc = theorem1_constants(0.5, d, 2, 1)
    assert bc.c == pytest.approx(8, rel=1e-12) and bc.c_prime == pytest.approx(0.1875, rel=1e-12)


@pytest.mark.parametrize("p,d,K", GRID)
def test_h1_general_k(p, d, K):
    c, cp = theorem1_exact(p, d, K, 1)
    assert c == 4 * K and cp == 3 * Fraction(p) / (2 * K * K)


@pytest.mark.parametrize("p,d,K", GRID)
def test_log_space_matches_exact(p, d, K):
    for H in (1, 2, 3):
        c, cp = theorem1_exact(p, d, K, H)
        bc = theorem1_constants(p, d, K, H)
        assert bc.log_c == pytest.approx(log_fraction(c), rel=1e-12)
        assert bc.log_c_prime == pytest.approx(log_fraction(cp), rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("p,d,K", GRID)
def test_log_c_increasing_in_h(p, d, K):
    logs = [theorem1_constants(p, d, K, H).log_c for H in range(1, 7)]
    assert all(b > a for a, b in zip(logs, logs[1:]))


def test_no_overflow_up_to_h12():
    for p, d, K in GRID:
        for H in range(1, 13):
            bc = theorem1_constants(p, d, K, H)
            vals = [bc.log_c, bc.log_c_prime, bc.log_transition_n, *bc.log_c_h, *bc.log_c_h_prime]
            assert all(math.isfinite(v) for v in vals)
            assert bc.transition_n > 0


def test_transition_log_growth_at_most_quadratic():
    for p, d, K in GRID:
        lt = np.array([theorem1_constants(p, d, K, H).log_transition_n for H in range(1, 13)])
        H = np.arange(1, 13)
        # second differences bounded: growth no faster than a quadratic in H
        ratio = lt[4:] / H[4:] ** 2
        assert np.all(np.diff(ratio) <= 1e-9 + 0.5 * ratio[:-1])


@pytest.mark.parametrize("p,d,K", GRID)
def test_level_constants_monotone(p, d, K):
    for H in range(1, 7):
        lv = lemma1_constants(p, d, K, H)
        c, cp = lv["log_c_h"], lv["log_c_h_prime"]
        assert c[0] == pytest.approx(0.0, abs=1e-12)
        for h in range(1, H):
            assert c[h] > c[h - 1]
            assert cp[h] < cp[h - 1]
            assert cp[h] < math.log(p / K) + cp[h - 1]


def test_level_one_prime_both_values():
    lv = lemma1_constants(0.4, 0.3, 2, 3)
    assert lv["log_c_h_prime"][0] == pytest.approx(math.log(3 * (0.4 / 2) ** 3))
    assert lv["log_c1_prime_basis"] == pytest.approx(math.log(0.3 ** 2 / 2))


@pytest.mark.parametrize("args,err", [((0.5, 0.0, 2, 2), DegenerateInstanceError),
                                      ((0.0, 0.3, 2, 2), ConfigError), ((0.5, 0.3, 1, 2), ConfigError),
                                      ((0.5, 0.3, 2, 0), ConfigError), ((0.5, 1.5, 2, 2), ConfigError)])
def test_invalid_parameters(args, err):
    with pytest.raises(err):
        theorem1_constants(*args)


def test_naive_bound_below_one_sweep():
    fb = naive_crafty_bounds(2, 2, 2, 0.2, 15)
    assert fb.naive == pytest.approx(2 * 2 ** 4)


def test_crafty_threshold_formula():
    fb = naive_crafty_bounds(2, 2, 2, 0.2, 1)
    assert fb.crafty_threshold == pytest.approx((4 * 2) ** 2 * 4 * (2 / 0.2) ** 2 * math.log(2))


def test_crafty_bound_decreasing():
    vals = [naive_crafty_bounds(2, 2, 3, 0.15, n).log_crafty for n in range(1, 5000, 97)]
    assert all(b < a for a, b in zip(vals, vals[1:]))


# --- concentration -----------------------------------------------------------


def test_zero_contamination_bracket_is_one():
    lb = log_azuma_bound(1.0, 0.25, 0.0, 1.0, 40)
    assert lb == pytest.approx(-3 * 0.25 ** 2 * 40 / 2)


def test_beta_family_changes_only_the_constants():
    default = log_azuma_bound(2.0, 0.5, 1.0, 0.5, 100)
    alt = log_azuma_bound(2.0, 0.5, 1.0, 0.5, 100, beta=0.9)
    assert default != alt and math.isfinite(alt)
    with pytest.raises(ConfigError):
        log_azuma_bound(2.0, 0.5, 1.0, 0.5, 100, beta=1.0)


def test_full_window_bound_is_lemma_bound():
    assert log_azuma_window_bound(1, 0.25, 1, 1, 50, 1.0) == log_azuma_bound(1, 0.25, 1, 1, 50)


def test_full_window_check_reproduces_sum_check():
    rows = azuma_check(1.0, 1.0, 1.0, [0.25], [1.0, 0.5], [10, 50], trials=20_000, seed=3)
    solo = azuma_check(1.0, 1.0, 1.0, [0.25], [1.0], [10, 50], trials=20_000, seed=3)
    assert [r.hits for r in rows if r.alpha == 1.0] == [r.hits for r in solo]


def test_iid_uniform_tail_below_bound():
    rows = azuma_check(1.0, 0.0, 1.0, [0.25], [1.0], [100], trials=100_000, seed=0)
    (row,) = rows
    assert row.ci_upper < row.analytic_bound and not row.violation


def test_contamination_frequency_follows_schedule():
    sc = AzumaScenario(h=1.0, delta=0.25, c_p=10.0, c_e=0.5)
    assert sc.contamination_prob(1) == 1.0
    assert sc.contamination_prob(20) == pytest.approx(10 * math.exp(-10))


@pytest.mark.parametrize("kw", [dict(delta=0.6), dict(delta=0.0), dict(c_e=0.0), dict(c_e=1.5),
                                dict(c_p=-1.0), dict(alpha=0.0)])
def test_scenario_validation(kw):
    with pytest.raises(ConfigError):
        AzumaScenario(**{"h": 1.0, "delta": 0.25, "c_p": 1.0, "c_e": 1.0, **kw}).validate()


def test_azuma_check_is_seed_deterministic():
    a = azuma_check(2.0, 1.0, 0.1, [0.5, 1.0], [0.5, 1.0], [10, 50], trials=5000, seed=9)
    b = azuma_check(2.0, 1.0, 0.1, [0.5, 1.0], [0.5, 1.0], [10, 50], trials=5000, seed=9)
    assert a == b


@given(st.integers(0, 200), st.integers(1, 200))
def test_clopper_pearson_brackets(k, extra):
    n = k + extra
    lo, hi = clopper_pearson(k, n)
    assert 0.0 <= lo <= k / n <= hi <= 1.0
