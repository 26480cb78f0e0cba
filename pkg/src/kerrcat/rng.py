"""Keyed random streams.

Every random draw in the package comes from a generator keyed by the master
seed plus a tuple of integers naming the work item (sample index, circuit
index, ...). Results therefore never depend on scheduling or thread count.
"""

import numpy as np


def stream(seed, *key):
    """Independent ``numpy.random.Generator`` for ``(seed, *key)``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))
