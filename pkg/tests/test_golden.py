"""Frozen values, each first checked against an independent computation."""

import pytest

from bruelab.domains import GameTreeSpec, SailingConfig, sailing_mdp, tiny_benchmark_mdp
from bruelab.oracle import build_oracle, minimax_oracle
from bruelab.planners import mcts_plan
from bruelab.rng import RngStream
from bruelab.theory import log_fraction, naive_crafty_bounds, theorem1_constants, theorem1_exact


def test_theorem_constants_h4():
    bc = theorem1_constants(0.3, 0.1, 2, 4)
    c, cp = theorem1_exact(0.3, 0.1, 2, 4)
    assert bc.log_c == pytest.approx(167.86298229454192, rel=1e-13)
    assert bc.log_c == pytest.approx(log_fraction(c), rel=1e-13)
    assert bc.log_c_prime == pytest.approx(-43.44320071315235, rel=1e-13)
    assert bc.log_c_prime == pytest.approx(log_fraction(cp), rel=1e-13)
    assert bc.transition_n == pytest.approx(1.2362243126956143e21, rel=1e-12)


def test_crafty_threshold_k2b2h2():
    assert naive_crafty_bounds(2, 2, 2, 0.2, 1).crafty_threshold == pytest.approx(17744.5678223346, rel=1e-12)


def test_sailing_5x5_regrets():
    mdp = sailing_mdp(SailingConfig(5))
    t = build_oracle(mdp, keep="top")
    s = mdp.encode(1, 1, 3, 0)
    want = [1.5426752003689774, 0.0, 2.180877735267277, 5.846508757726298, 9.072335559100203,
            11.621993389264276, 8.223504598185762]
    got = [t.regret(s, mdp.horizon, a) for a in mdp.applicable_actions(s)]
    assert got == pytest.approx(want, abs=1e-9)


def test_gametree_b2_d6_root_value():
    assert minimax_oracle(GameTreeSpec(2, 6, 12345)).meta["root_value_native"] == 44


def test_brue_on_3x3_sailing():
    mdp = sailing_mdp(SailingConfig(3))
    t = build_oracle(mdp)
    s0 = mdp.encode(0, 0, 0, 0)
    a = mcts_plan(mdp, s0, 2 ** 12, "brue", RngStream.derive(0, "golden"))
    assert a == 1 and t.regret(s0, mdp.horizon, a) == 0.0


def test_tiny_instance():
    t = build_oracle(tiny_benchmark_mdp())
    assert t.params.d == pytest.approx(0.14809947584427285, rel=1e-12)
    assert t.params.p == pytest.approx(0.2695399794207216, rel=1e-12)
    assert t.q_values(0, 3).tolist() == pytest.approx([1.6233438449066, 1.705988940456637], rel=1e-12)
