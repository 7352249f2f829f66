"""Seed-splitting rule for per-trial random streams.

stream(trial) = mix64(master_seed, trial_index). The rule is part of the
output contract: changing it changes every generated channel.
"""

import numpy as np

_MASK = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK
    return x ^ (x >> 31)


def mix64(master_seed: int, index: int) -> int:
    return _splitmix64(_splitmix64(master_seed & _MASK) ^ (index & _MASK))


def trial_seed(master_seed: int, trial: int, value_index: int | None = None) -> int:
    """Seed of one trial; sweeps over geometry also mix in the sweep-value index."""
    base = master_seed if value_index is None else mix64(master_seed, value_index)
    return mix64(base, trial)


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))
