"""Counter-based random streams.

Every random quantity in the package is drawn from a Philox stream keyed by
``(seed, purpose, *indices)``.  A trial therefore owns its stream no matter
which worker runs it, and results never depend on scheduling.
"""
from __future__ import annotations

import numpy as np

# Stream purposes.  Values are part of the reproducibility contract: changing
# them changes every seeded result.
RAW = 1
MASK = 2
XI = 3
SMALL_BALL = 4
DISC = 5

_MASK64 = (1 << 64) - 1


def stream(seed: int, purpose: int, *indices: int) -> np.random.Generator:
    """Return an independent generator for ``(seed, purpose, *indices)``."""
    key = [int(seed) & _MASK64, int(purpose)] + [int(i) for i in indices]
    if any(k < 0 for k in key):
        raise ValueError("stream keys must be non-negative integers")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(key)))
