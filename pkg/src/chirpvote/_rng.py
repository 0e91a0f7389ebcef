"""Keyed randomness.

Every stochastic draw in the package is keyed by (global seed, *path), where
path components are small integers (round index, device index) or short
strings naming the draw kind. Draws are therefore independent of evaluation
order, vectorization strategy, and thread count: the same key always yields
the same stream.
"""
from __future__ import annotations

import zlib

import numpy as np


def key_component(part: int | str) -> int:
    if isinstance(part, str):
        return zlib.crc32(part.encode("utf-8"))
    return int(part) & 0xFFFFFFFF


def keyed_rng(seed: int, *path: int | str) -> np.random.Generator:
    """Generator for the draw identified by (seed, *path)."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(key_component(p) for p in path))
    return np.random.default_rng(ss)
