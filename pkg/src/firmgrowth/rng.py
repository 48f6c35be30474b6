"""Deterministic random-stream derivation for reproducible simulations."""
from __future__ import annotations

import numpy as np


def substream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for one (seed, key) pair.

    Streams are derived from the master seed plus a structural key (stream id,
    iteration index, ...) instead of by sequential draws, so consuming more or
    fewer values in one stream never shifts the values seen by another. This
    keeps e.g. the replacement draws identical when the allocation mode of the
    market changes.
    """
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))
