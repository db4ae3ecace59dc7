"""Deterministic random-stream derivation.

One master seed; every (trial, codeword, restart, ...) draws from an
independently derived stream, so serial and sharded runs agree bit for bit
and adding trials never perturbs earlier ones.
"""

import numpy as np


def substream(seed, *key):
    """Return the generator for stream ``key`` derived from ``seed``.

    Streams with different keys are statistically independent, and the
    mapping (seed, key) -> stream is stable across runs and platforms.
    """
    return np.random.default_rng(
        np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    )
