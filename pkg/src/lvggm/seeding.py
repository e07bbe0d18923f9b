"""Deterministic seeding.

All randomness flows through numpy's Philox bit generator (a named,
counter-based generator whose streams are identical across platforms for a
fixed numpy version).  Derived seeds are produced by the splitmix64 output
function, so replicates and pipeline stages get independent streams that
can be regenerated in any order.
"""

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15

# stage tags for the simulate -> hide -> sample pipeline
STAGE_STRUCTURE = 0
STAGE_HIDING = 1
STAGE_SAMPLING = 2


def splitmix64(state):
    """One splitmix64 step: returns the mixed output of ``state + GOLDEN``."""
    z = (int(state) + _GOLDEN) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def mix(seed, index):
    """Derive an independent 64-bit seed from ``(seed, index)``."""
    return splitmix64((int(seed) & _MASK64) ^ splitmix64(index))


def generator(seed):
    """Philox generator keyed by a 64-bit seed."""
    return np.random.Generator(np.random.Philox(key=int(seed) & _MASK64))
