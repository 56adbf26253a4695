"""Deterministic random-stream derivation.

All randomness in the package flows through one 64-bit master seed.
Each purpose (a scenario pair, a retry attempt, a test corpus) derives
its own independent stream from ``(master_seed, *path)``, so adding new
purposes never perturbs the draws of existing ones.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def spawn_rng(master_seed: int, *path: int) -> np.random.Generator:
    """Child generator keyed by the master seed and an integer path.

    The same ``(master_seed, *path)`` always yields the same stream;
    distinct paths yield statistically independent streams.
    """
    words = [int(master_seed) & _MASK64] + [int(p) & _MASK64 for p in path]
    return np.random.default_rng(np.random.SeedSequence(words))
