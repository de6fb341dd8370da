"""Named RNG substreams derived from one master seed.

Every random draw in an experiment comes from a substream identified by a
stream id plus optional integer indices (cell, path).  Substreams are
independent SeedSequence children of the master seed, so truth noise, filter
initialization, and per-member perturbations never share a stream.
"""
from __future__ import annotations

import numpy as np

TRUTH_INIT = 0
TRUTH_OBS = 1
FILTER_INIT = 2
FILTER_PERT = 3


def substream(master_seed: int, *key: int) -> np.random.Generator:
    """Generator for the substream (stream id, indices...) of the master seed."""
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=tuple(key)))
