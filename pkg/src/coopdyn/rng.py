"""Counter-based reproducible RNG streams (Philox).

Every stochastic operation takes an explicit seed or Generator.  Streams with
distinct (seed, stream) keys are independent, so parallel reductions can sum
integer counts from separately-keyed streams without ordering effects.
"""

from __future__ import annotations

import numpy as np


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Philox generator keyed by (seed, stream); bit-reproducible."""
    return np.random.Generator(np.random.Philox(key=np.array([seed, stream], dtype=np.uint64)))


def as_rng(seed_or_rng) -> np.random.Generator:
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return make_rng(int(seed_or_rng))
