"""
apps.spectrum.streams
---------------------
Counter-based random streams. Every consumer (trajectory, Monte-Carlo
cone point, bootstrap) derives its own Philox generator from a root seed
plus integer keys, so results do not depend on scheduling order.
"""

from typing import Iterable

import numpy as np


def derive_stream(seed: int, *keys: int) -> np.random.Generator:
    """
    Build an independent Philox generator for (seed, *keys).

    Args:
        seed (int): Root 64-bit seed of the run.
        *keys (int): Stream coordinates, e.g. (trajectory_index,) or (row, replica).

    Returns:
        np.random.Generator: Generator backed by a Philox bit generator.
    """
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF, *(int(k) for k in keys)]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def derive_streams(seed: int, count: int, *prefix: int) -> Iterable[np.random.Generator]:
    return [derive_stream(seed, *prefix, index) for index in range(count)]
