"""Counter-based randomness.

Every random draw in the package is a pure function of integer keys,
``uniform(seed, a, b, ...)``.  The mixer is SplitMix64: keys are folded
left to right with ``h = splitmix64(h ^ key)`` starting from
``h = splitmix64(seed)``.  A uniform in (0, 1) is ``((h >> 11) + 0.5) / 2**53``.
Streams are reproducible and independent of evaluation order.
"""

import numpy as np
from numba import njit

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(x):
    x = (x + GOLDEN) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def derive_seed(seed, *keys):
    """Sub-seed for ``keys`` under a master ``seed`` (non-negative, < 2**63)."""
    h = splitmix64(int(seed) & MASK64)
    for k in keys:
        h = splitmix64(h ^ (int(k) & MASK64))
    return h >> 1


@njit(cache=True, inline="always")
def _mix(x):
    x = x + np.uint64(0x9E3779B97F4A7C15)
    x = (x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    x = (x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return x ^ (x >> np.uint64(31))


@njit(cache=True, inline="always")
def _to_unit(h):
    return (np.float64(h >> np.uint64(11)) + 0.5) * (1.0 / 9007199254740992.0)


@njit(cache=True)
def uniform2(seed, a):
    h = _mix(np.uint64(seed))
    h = _mix(h ^ np.uint64(a))
    return _to_unit(h)


@njit(cache=True)
def uniform3(seed, a, b):
    h = _mix(np.uint64(seed))
    h = _mix(h ^ np.uint64(a))
    h = _mix(h ^ np.uint64(b))
    return _to_unit(h)


@njit(cache=True)
def uniform4(seed, a, b, c):
    h = _mix(np.uint64(seed))
    h = _mix(h ^ np.uint64(a))
    h = _mix(h ^ np.uint64(b))
    h = _mix(h ^ np.uint64(c))
    return _to_unit(h)


def keyed_uniforms(seed, labels):
    """Vectorised ``uniform2(seed, label)`` over an integer array."""
    labels = np.asarray(labels, dtype=np.uint64)
    with np.errstate(over="ignore"):
        h = _mix_np(np.full(labels.shape, np.uint64(seed)))
        h = _mix_np(h ^ labels)
    return ((h >> np.uint64(11)).astype(np.float64) + 0.5) / 9007199254740992.0


def _mix_np(x):
    x = x + np.uint64(GOLDEN)
    x = (x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    x = (x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return x ^ (x >> np.uint64(31))
