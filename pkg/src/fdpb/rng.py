"""Labelled RNG streams derived from a single master seed.

Every stochastic component draws from its own stream keyed by
(master_seed, labels...), so adding or removing one consumer never
perturbs the draws seen by another.
"""

from __future__ import annotations

import hashlib

import numpy as np


def derive_seed(master_seed: int, *labels: object) -> int:
    """Hash (master_seed, labels...) into a 64-bit stream seed."""
    h = hashlib.sha256(str(master_seed).encode("utf-8"))
    for label in labels:
        h.update(b"/")
        h.update(str(label).encode("utf-8"))
    return int.from_bytes(h.digest()[:8], "big")


def substream(master_seed: int, *labels: object) -> np.random.Generator:
    """Independent generator for the purpose named by `labels`."""
    return np.random.default_rng(derive_seed(master_seed, *labels))
