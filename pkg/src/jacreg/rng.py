"""Seed handling: one 64-bit root seed split into independent
counter-based (Philox) streams per named consumer, so draw sequences do
not depend on evaluation order elsewhere in the program."""

from __future__ import annotations

import zlib

import numpy as np


def stream(seed, name):
    """Independent Philox stream for one consumer ("data", "init", ...)."""
    tag = zlib.crc32(name.encode("utf-8"))
    seq = np.random.SeedSequence(entropy=int(seed) & 0xFFFFFFFFFFFFFFFF,
                                 spawn_key=(tag,))
    return np.random.Generator(np.random.Philox(seq))


def split_streams(seed, names=("data", "init", "probes", "eval", "noise")):
    return {name: stream(seed, name) for name in names}
