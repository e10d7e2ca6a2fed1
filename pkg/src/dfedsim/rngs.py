"""Deterministic substream derivation for all randomness in a run.

Every random draw in the simulator comes from a named substream of one run
seed, so results never depend on call order and any component can be
re-derived in isolation.
"""

from __future__ import annotations

import zlib

import numpy as np


def substream(seed: int, *key: int | str) -> np.random.Generator:
    """Return an independent generator identified by ``(seed, key)``.

    String key parts are mapped through crc32 so names stay stable across
    interpreter runs; integer parts (round indices, device ids) pass through.
    """
    parts = tuple(
        zlib.crc32(p.encode()) if isinstance(p, str) else int(p) for p in key
    )
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=parts))
