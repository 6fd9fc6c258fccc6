"""Seeded, portable random streams (PCG64 via numpy SeedSequence)."""

import numpy as np


def make_rng(seed, *keys):
    """Generator for ``seed`` with optional integer sub-stream keys.

    ``make_rng(s, k)`` is the stream of trajectory ``k`` under master seed
    ``s``; it does not depend on how many other streams are drawn.
    """
    entropy = [int(seed)] + [int(k) for k in keys]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def derive_seed(seed, *keys):
    """Integer seed for a named sub-experiment of ``seed``."""
    state = np.random.SeedSequence([int(seed)] + [int(k) for k in keys]).generate_state(2)
    return int(state[0]) << 32 | int(state[1])
