"""Deterministic derivation of 64-bit seeds from integer tuples."""

import numpy as np


def derive_seed(*parts: int) -> int:
    """Collapse integer parts into a single 64-bit seed.

    Uses numpy's SeedSequence mixing, so the result is stable across runs
    and platforms and well-separated for nearby inputs.
    """
    ss = np.random.SeedSequence([int(p) & 0xFFFFFFFFFFFFFFFF for p in parts])
    return int(ss.generate_state(1, np.uint64)[0])
