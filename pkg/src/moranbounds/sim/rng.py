"""Counter-based random streams keyed by ``(seed, run_index)``.

Every run draws from its own stream ``u_j = finalize(key + (j+1)*GAMMA)``
where ``finalize`` is the SplitMix64 output function and
``key = finalize(finalize(seed) ^ finalize(run_index + GAMMA))``. A run's
randomness therefore depends only on the seed and its index, never on how
runs are scheduled across threads.
"""

from __future__ import annotations

import numba
import numpy as np

GAMMA = 0x9E3779B97F4A7C15
_MASK = (1 << 64) - 1
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_SCALE = 2.0**-53


def finalize(z: int) -> int:
    z &= _MASK
    z = ((z ^ (z >> 30)) * _M1) & _MASK
    z = ((z ^ (z >> 27)) * _M2) & _MASK
    return z ^ (z >> 31)


def stream_key(seed: int, run_index: int) -> int:
    return finalize(finalize(seed) ^ finalize(run_index + GAMMA))


class CounterStream:
    """Pure-Python view of one run's stream (mirrors the compiled kernels)."""

    def __init__(self, seed: int, run_index: int = 0):
        self.key = stream_key(seed, run_index)
        self.counter = 0

    def random(self) -> float:
        self.counter += 1
        return (finalize(self.key + self.counter * GAMMA) >> 11) * _SCALE


@numba.njit(cache=True, inline="always")
def nb_finalize(z):
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


@numba.njit(cache=True)
def nb_stream_key(seed, run_index):
    return nb_finalize(nb_finalize(np.uint64(seed)) ^ nb_finalize(np.uint64(run_index) + np.uint64(GAMMA)))


@numba.njit(cache=True, inline="always")
def nb_uniform(key, counter):
    z = nb_finalize(np.uint64(key) + np.uint64(counter) * np.uint64(GAMMA))
    return float(z >> np.uint64(11)) * _SCALE
