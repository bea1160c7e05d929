"""Deterministic stream derivation on top of numpy's counter-based Philox.

Replica r of a run with master seed s draws from Philox keyed by
``s XOR splitmix64(r)``, so ensembles are reproducible bit-for-bit no matter
how replicas are scheduled across workers.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """One step of the splitmix64 output function."""
    z = (x + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return (z ^ (z >> 31)) & MASK64


def derive_seed(master_seed: int, replica: int) -> int:
    return (int(master_seed) & MASK64) ^ splitmix64(int(replica))


def generator(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=int(seed) & MASK64))


def replica_generator(master_seed: int, replica: int) -> np.random.Generator:
    return generator(derive_seed(master_seed, replica))
