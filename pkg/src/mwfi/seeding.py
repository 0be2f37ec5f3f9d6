"""Deterministic derivation of per-simulation noise seeds.

Every noisy stage owns an independent Philox stream. Child seeds are derived
from a base seed plus an integer path, so a whole run is reproducible from
one number and repeated stages never share a stream.
"""

import numpy as np

# stage identifiers, one per noisy pipeline step
STAGE_CAL = 0
STAGE_MEASURE = 1
STAGE_CLASSIFY = 2
STAGE_DYNAMIC = 3
STAGE_FTPM = 4


def derive_seed(base_seed: int, *path: int) -> int:
    """Derive a child seed from a base seed and an integer path."""
    ss = np.random.SeedSequence((int(base_seed),) + tuple(int(p) for p in path))
    return int(ss.generate_state(1, np.uint64)[0])
