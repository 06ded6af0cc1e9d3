"""Deterministic random-source derivation for reproducible parallel runs.

Every stochastic routine in the package takes an explicit
``numpy.random.Generator``.  Replicate ``k`` of an experiment uses a
generator derived from ``(master_seed, stream_tag, k)``; the derivation is
a pure hash (``numpy.random.SeedSequence`` with a spawn key), so results do
not depend on scheduling order or on the number of worker processes.
"""

from __future__ import annotations

import hashlib

import numpy as np

RandomSource = np.random.Generator


def _key_words(item) -> tuple[int, ...]:
    if isinstance(item, (int, np.integer)):
        if item < 0:
            raise ValueError(f"seed-path integers must be nonnegative, got {item}")
        value = int(item)
        return (value & 0xFFFFFFFF, (value >> 32) & 0xFFFFFFFF)
    if isinstance(item, str):
        digest = hashlib.sha256(item.encode("utf-8")).digest()
        return (
            int.from_bytes(digest[0:4], "little"),
            int.from_bytes(digest[4:8], "little"),
        )
    raise TypeError(f"seed-path items must be int or str, got {type(item)!r}")


def derive_seed_sequence(master_seed: int, *path) -> np.random.SeedSequence:
    """Hash ``(master_seed, *path)`` into an independent seed sequence."""
    key: tuple[int, ...] = ()
    for item in path:
        key += _key_words(item)
    return np.random.SeedSequence(master_seed, spawn_key=key)


def spawn_rng(master_seed: int, *path) -> RandomSource:
    """Return a single-owner generator for the stream named by ``path``.

    Two calls with the same arguments return generators producing identical
    streams; any change to the path (a replicate index, a stream tag string)
    gives a statistically independent stream.
    """
    return np.random.default_rng(derive_seed_sequence(master_seed, *path))
