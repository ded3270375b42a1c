"""Counter-based random streams.

Every stream is SplitMix64 run in counter mode: draw ``i`` of a stream with
key ``k`` is ``mix64(k + i * GOLDEN)``.  A stream is therefore fully described
by ``(key, counter)``, which makes it trivial to hand the same stream to a
compiled kernel and pick it up again afterwards.

Keys are derived from ``(seed, stream_id)``; ``stream_id`` is usually produced
by :func:`stream_id` from a tuple of labels such as ``("trial", 3, "uct")``.
"""

from __future__ import annotations

import hashlib

import numpy as np
from numba import njit

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_MUL1 = 0xBF58476D1CE4E5B9
_MUL2 = 0x94D049BB133111EB
_SEED_SALT = 0x6A09E667F3BCC909
_UNIT = 2.0**-53

_NB_GOLDEN = np.uint64(GOLDEN)
_NB_MUL1 = np.uint64(_MUL1)
_NB_MUL2 = np.uint64(_MUL2)


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * _MUL1) & MASK64
    z = ((z ^ (z >> 27)) * _MUL2) & MASK64
    return z ^ (z >> 31)


def stream_key(seed: int, stream_id: int) -> int:
    return mix64(mix64((seed ^ _SEED_SALT) & MASK64) + (stream_id * GOLDEN))


def stream_id(*labels: object) -> int:
    """Stable 64-bit id for a tuple of str/int labels (platform independent)."""
    digest = hashlib.blake2b(repr(tuple(labels)).encode("utf-8"), digest_size=8)
    return int.from_bytes(digest.digest(), "little")


class RngStream:
    """A single-owner random stream.

    Two streams built from the same ``(seed, stream_id)`` produce the same
    draws on every platform.
    """

    __slots__ = ("seed", "stream_id", "key", "counter")

    def __init__(self, seed: int, stream_id: int = 0, counter: int = 0):
        self.seed = int(seed) & MASK64
        self.stream_id = int(stream_id) & MASK64
        self.key = stream_key(self.seed, self.stream_id)
        self.counter = int(counter)

    @classmethod
    def derive(cls, seed: int, *labels: object) -> "RngStream":
        return cls(seed, stream_id(*labels))

    def child(self, *labels: object) -> "RngStream":
        """Independent stream named by ``labels`` under this stream's key."""
        return RngStream(self.key, stream_id(*labels))

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id}, counter={self.counter})"

    def next_u64(self) -> int:
        self.counter += 1
        return mix64(self.key + self.counter * GOLDEN)

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * _UNIT

    def integers(self, n: int) -> int:
        """Uniform integer in [0, n)."""
        return int(self.random() * n)

    def choice_index(self, n: int) -> int:
        """Like :meth:`integers` but consumes nothing when ``n == 1``."""
        if n == 1:
            return 0
        return int(self.random() * n)

    def state(self) -> np.ndarray:
        """``[key, counter]`` as the uint64 array compiled kernels mutate."""
        return np.array([self.key, self.counter], dtype=np.uint64)

    def sync(self, state: np.ndarray) -> None:
        """Advance this stream to the counter a kernel left in ``state``."""
        if int(state[0]) != self.key:
            raise ValueError("state array belongs to a different stream")
        self.counter = int(state[1])

    def uniform_block(self, n: int) -> np.ndarray:
        """``n`` consecutive draws of :meth:`random`, vectorised."""
        counters = np.arange(self.counter + 1, self.counter + 1 + n, dtype=np.uint64)
        self.counter += n
        z = np.uint64(self.key) + counters * _NB_GOLDEN
        z = (z ^ (z >> np.uint64(30))) * _NB_MUL1
        z = (z ^ (z >> np.uint64(27))) * _NB_MUL2
        z = z ^ (z >> np.uint64(31))
        return (z >> np.uint64(11)).astype(np.float64) * _UNIT


# --- compiled counterparts; ``st`` is the array returned by RngStream.state()


@njit(cache=True)
def nb_next(st):
    st[1] += np.uint64(1)
    z = st[0] + st[1] * _NB_GOLDEN
    z = (z ^ (z >> np.uint64(30))) * _NB_MUL1
    z = (z ^ (z >> np.uint64(27))) * _NB_MUL2
    return z ^ (z >> np.uint64(31))


@njit(cache=True)
def nb_random(st):
    return np.float64(nb_next(st) >> np.uint64(11)) * 1.1102230246251565e-16


@njit(cache=True)
def nb_choice_index(st, n):
    if n == 1:
        return 0
    return np.int64(nb_random(st) * n)
