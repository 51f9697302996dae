"""Deterministic, splittable random streams.

Every run derives its generator from a master seed plus a tuple of string
labels (function name, algorithm, trial index, ...). The derivation hashes
the labels into a 128-bit Philox key, so streams are reproducible across
platforms and independent of execution order.
"""

from __future__ import annotations

import hashlib

import numpy as np


def derive_key(master_seed: int, *labels) -> int:
    """128-bit key from a master seed and arbitrary hashable labels."""
    tag = repr((int(master_seed),) + tuple(str(x) for x in labels))
    digest = hashlib.sha256(tag.encode("utf-8")).digest()
    return int.from_bytes(digest[:16], "little")


def derive_rng(master_seed: int, *labels) -> np.random.Generator:
    """Counter-based generator for the stream named by ``labels``.

    Seeded through a SeedSequence (not a raw Philox key) so the stream can
    be split further with ``rng.spawn``.
    """
    seq = np.random.SeedSequence(derive_key(master_seed, *labels))
    return np.random.Generator(np.random.Philox(seq))
