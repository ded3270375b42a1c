import pytest
from hypothesis import given, strategies as st

from bruelab.domains import (SailingConfig, chain_mdp, deterministic_bandit, random_mdp,
                             random_tree_mdp, sailing_mdp)
from bruelab.errors import ContractViolation, MissingOracleEntry
from bruelab.mdp import Trajectory, rollout, simple_regret, uniform_policy
from bruelab.oracle import build_oracle
from bruelab.rng import RngStream


def test_regret_of_optimal_action_is_zero():
    t = build_oracle(deterministic_bandit([1.0, 0.0]))
    assert simple_regret(t, 0, 1, 0) == 0.0


def test_regret_of_suboptimal_bandit_arm():
    t = build_oracle(deterministic_bandit([1.0, 0.0]))
    assert simple_regret(t, 0, 1, 1) == pytest.approx(1.0)


def test_regret_unknown_pair_raises():
    t = build_oracle(deterministic_bandit([1.0, 0.0]))
    with pytest.raises(MissingOracleEntry):
        simple_regret(t, 0, 2, 0)
    with pytest.raises(MissingOracleEntry):
        simple_regret(t, 99, 1, 0)


@given(st.integers(0, 200), st.integers(1, 3), st.integers(1, 3))
def test_regret_nonnegative_everywhere(seed, K, H):
    mdp = random_mdp(12, K, 2, H, seed)
    t = build_oracle(mdp)
    for h in range(1, H + 1):
        for i in range(t.model.num_states):
            if not t.covered[h, i]:
                continue
            s = t.model.states[i]
            regs = [simple_regret(t, s, h, a) for a in range(t.model.n_actions[i])]
            assert all(r >= 0 for r in regs)
            if regs:
                assert min(regs) == 0.0


def test_rollout_stops_at_terminal():
    mdp = chain_mdp(2)
    traj = rollout(mdp, 1, lambda s, d, r: 0, max_depth=5, rng=RngStream.derive(0))
    assert traj.states == (1, 2)
    assert traj.well_formed(mdp, 5)


def test_rollout_on_chain_is_unique():
    mdp = chain_mdp(3)
    traj = rollout(mdp, 0, lambda s, d, r: 0, 3, RngStream.derive(0))
    assert traj.states == (0, 1, 2, 3) and traj.actions == (0, 0, 0) and traj.rewards == (1.0, 1.0, 1.0)
    assert traj.reward_to_go() == [3.0, 2.0, 1.0]


def test_rollout_is_reproducible_on_sailing():
    mdp = sailing_mdp(SailingConfig(5))
    s0 = mdp.encode(0, 0, 2, 0)
    a = rollout(mdp, s0, uniform_policy(mdp), mdp.horizon, RngStream.derive(7, "r"))
    b = rollout(mdp, s0, uniform_policy(mdp), mdp.horizon, RngStream.derive(7, "r"))
    assert a == b


def test_rollout_rejects_bad_policy():
    with pytest.raises(ContractViolation):
        rollout(chain_mdp(3), 0, lambda s, d, r: 5, 3, RngStream.derive(0))


def test_rollout_rejects_terminal_start():
    with pytest.raises(ContractViolation):
        rollout(chain_mdp(3), 3, lambda s, d, r: 0, 3, RngStream.derive(0))


def test_trajectory_length_contract():
    with pytest.raises(ContractViolation):
        Trajectory((0, 1), (0,), ())


@given(st.integers(0, 10_000), st.integers(1, 4))
def test_uniform_rollouts_are_well_formed(seed, H):
    mdp = random_mdp(10, 3, 2, H, seed % 50)
    s0 = mdp.start_states()[0]
    traj = rollout(mdp, s0, uniform_policy(mdp), H, RngStream.derive(seed))
    assert len(traj.states) == len(traj.actions) + 1 == len(traj.rewards) + 1
    assert traj.well_formed(mdp)
    lo, hi = mdp.reward_range
    assert all(lo <= r <= hi for r in traj.rewards)


@given(st.integers(0, 300))
def test_tree_mdp_outcomes_sum_to_one(seed):
    mdp = random_tree_mdp(2, 3, 2, seed)
    for s in mdp.transitions:
        for a in mdp.applicable_actions(s):
            outs = mdp.enumerate_outcomes(s, a)
            assert abs(sum(p for _, p, _ in outs) - 1.0) <= 1e-12
            assert all(p > 0 for _, p, _ in outs)
