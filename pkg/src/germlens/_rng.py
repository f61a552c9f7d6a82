"""Deterministic random-stream derivation.

Every sampling routine takes an explicit integer seed and derives child
generators from (seed, key...) so that shell-parallel work can be merged
deterministically regardless of execution order.
"""

from __future__ import annotations

import zlib

import numpy as np


def _key_to_int(k) -> int:
    if isinstance(k, (int, np.integer)):
        return int(k) & 0xFFFFFFFF
    if isinstance(k, str):
        return zlib.crc32(k.encode("utf-8"))
    raise TypeError(f"rng key must be int or str, got {type(k)!r}")


def rng_for(seed: int, *keys) -> np.random.Generator:
    """Child generator for a (seed, keys...) address.

    Same address, same stream. Different addresses give independent
    streams, so per-shell or per-batch sampling stays reproducible under
    any scheduling.
    """
    ss = np.random.SeedSequence(
        entropy=int(seed) & (2**64 - 1),
        spawn_key=tuple(_key_to_int(k) for k in keys),
    )
    return np.random.default_rng(ss)
