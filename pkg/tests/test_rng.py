import numpy as np
from hypothesis import given, strategies as st

from bruelab.rng import RngStream, nb_choice_index, nb_random


@given(st.integers(0, 2**63), st.text(max_size=8))
def test_same_seed_and_labels_repeat(seed, label):
    a = RngStream.derive(seed, label, 3)
    b = RngStream.derive(seed, label, 3)
    assert [a.next_u64() for _ in range(5)] == [b.next_u64() for _ in range(5)]


def test_labels_give_different_streams():
    a = RngStream.derive(1, "search", 0)
    b = RngStream.derive(1, "search", 1)
    assert a.next_u64() != b.next_u64()


def test_child_is_independent_of_parent_position():
    a = RngStream.derive(5, "x")
    c1 = a.child("recommend", 4)
    a.random()
    c2 = a.child("recommend", 4)
    assert c1.random() == c2.random()


@given(st.integers(0, 2**32), st.integers(1, 50))
def test_choice_index_range(seed, n):
    r = RngStream.derive(seed)
    for _ in range(20):
        assert 0 <= r.choice_index(n) < n


def test_choice_of_one_consumes_nothing():
    a, b = RngStream.derive(9), RngStream.derive(9)
    assert a.choice_index(1) == 0
    assert a.random() == b.random()


def test_numba_helpers_follow_python_stream():
    py = RngStream.derive(11, "nb")
    st_ = RngStream.derive(11, "nb").state()
    assert [py.random() for _ in range(4)] == [nb_random(st_) for _ in range(4)]
    assert [py.choice_index(7) for _ in range(6)] == [nb_choice_index(st_, 7) for _ in range(6)]


def test_sync_resumes_python_stream():
    a = RngStream.derive(3)
    st_ = a.state()
    nb_random(st_)
    a.sync(st_)
    b = RngStream.derive(3)
    b.random()
    assert a.random() == b.random()


def test_uniform_block_matches_scalar_draws():
    a, b = RngStream.derive(2, "blk"), RngStream.derive(2, "blk")
    assert np.array_equal(a.uniform_block(10), np.array([b.random() for _ in range(10)]))


def test_uniform_moments():
    x = RngStream.derive(4).uniform_block(200_000)
    assert 0.0 <= x.min() and x.max() < 1.0
    assert abs(x.mean() - 0.5) < 0.005
    assert abs(x.var() - 1 / 12) < 0.002
