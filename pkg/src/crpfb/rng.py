"""Reproducible random streams keyed by (seed, stream id...).

Every stream is a Philox generator (counter based) seeded from a
``SeedSequence`` whose spawn key is the stream id, so streams for different
ids never overlap and can be created in any order, in any process.
"""

from __future__ import annotations

import numpy as np

# stream purposes
HYPOTHESES = 1
INIT = 2
JITTER = 3
RESAMPLE = 4
H0_NOISE = 10
H0_BANK = 11
H1_NOISE = 12
H1_BANK = 13
H1_COEFS = 14
BASELINE = 15


def stream(seed: int, *key: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(seed: int, *key: int) -> int:
    """A 63-bit integer seed for the child keyed by ``key``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, np.uint64)[0] >> np.uint64(1))
