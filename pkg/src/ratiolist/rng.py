"""Seeded random streams.

Every random draw in the package goes through a :class:`numpy.random.Generator`
backed by the Philox4x64 counter-based bit generator. Streams are derived from
one integer seed plus a *spawn key*, a tuple of small integers naming the
purpose and (optionally) a worker or chunk index::

    stream(seed, CODEBOOK)          # codebook draws
    stream(seed, TRIALS, chunk)     # Monte Carlo trials, chunk ``chunk``

Distinct spawn keys give statistically independent streams, and the mapping
``(seed, key) -> stream`` does not depend on how work is scheduled, so results
are invariant to the number of workers.
"""

from __future__ import annotations

import numpy as np

RNG_ALGORITHM = "numpy-philox4x64/seedsequence-v1"

# purpose tags (first element of the spawn key)
CODEBOOK = 1
TRIALS = 2
SPECTRUM = 3
SEARCH = 4
EXPECTATION = 5


def stream(seed: int, *key: int) -> np.random.Generator:
    if seed < 0:
        raise ValueError(f"seed must be nonnegative, got {seed}")
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def as_generator(rng: np.random.Generator | int | None) -> np.random.Generator:
    """Accept a Generator or an integer seed (convenience for interactive use)."""
    if isinstance(rng, np.random.Generator):
        return rng
    if rng is None:
        raise ValueError("an explicit seed or Generator is required")
    return stream(int(rng))
