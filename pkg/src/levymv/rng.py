"""Counter-based random substreams for reproducible parallel experiments.

Every stochastic routine in the package receives an explicit generator.
Substreams are derived from a user seed plus a path of small integers
(role, repetition, step, ...) hashed into a Philox key, so the same
(seed, path) always yields the same stream regardless of how many other
streams were consumed, in which order, or on how many workers.
"""

import numpy as np

_MASK64 = (1 << 64) - 1


def _mix(h, v):
    # splitmix64 finalizer, one absorption step
    h = (h + (v & _MASK64)) & _MASK64
    h ^= h >> 30
    h = (h * 0xBF58476D1CE4E5B9) & _MASK64
    h ^= h >> 27
    h = (h * 0x94D049BB133111EB) & _MASK64
    h ^= h >> 31
    return h


def derive_key(seed, *path):
    """Collapse (seed, *path) into a 64-bit stream key."""
    h = _mix(0x9E3779B97F4A7C15, seed)
    for p in path:
        h = _mix(h, p)
    return h


def substream(seed, *path):
    """Independent ``numpy.random.Generator`` keyed by (seed, *path).

    Philox is counter-based: streams with distinct keys are statistically
    independent and a stream's output never depends on other streams.
    """
    k0 = derive_key(seed, *path)
    k1 = _mix(k0, 0x2545F4914F6CDD1D)
    key = np.array([k0, k1], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
