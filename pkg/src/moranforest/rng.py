"""Seeded random streams.

Every sampler takes a :class:`numpy.random.Generator`.  Monte Carlo runs split
their replicates into fixed-size blocks and give block ``i`` the stream
derived from ``(master_seed, i)``, so results never depend on how blocks are
scheduled across workers.
"""
from __future__ import annotations

import secrets
import sys

import numpy as np

RngStream = np.random.Generator


def make_rng(seed: int | None = None) -> np.random.Generator:
    if seed is None:
        return np.random.default_rng()
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(_as_entropy(seed))))


def derived_rng(master_seed: int, index: int) -> np.random.Generator:
    """Stream number ``index`` of ``master_seed`` (counter-based derivation)."""
    ss = np.random.SeedSequence([_as_entropy(master_seed), int(index)])
    return np.random.Generator(np.random.PCG64(ss))


def fresh_seed(announce: bool = True) -> int:
    seed = secrets.randbits(63)
    if announce:
        print(f"moranforest: using auto-generated seed {seed}", file=sys.stderr)
    return seed


def _as_entropy(seed: int) -> int:
    seed = int(seed)
    # SeedSequence rejects negatives; fold into 64 bits
    return seed & 0xFFFFFFFFFFFFFFFF
