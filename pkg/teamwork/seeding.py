"""Named random streams.

Every consumer of randomness asks for ``stream(seed, *keys)``; the keys name
the purpose (``'testset'``, ``'rollout'``, ...) and the position (iteration,
scenario index, slot).  Streams with different keys are independent and do
not depend on the order in which they are requested.
"""
from __future__ import annotations

import zlib
from typing import Union

import numpy as np

Key = Union[int, str]


def _word(key: Key) -> int:
    if isinstance(key, (bool, np.bool_)):
        return int(key)
    if isinstance(key, (int, np.integer)):
        if key < 0:
            raise ValueError(f'stream keys must be non-negative, got {key}')
        return int(key)
    if isinstance(key, str):
        return zlib.crc32(key.encode('utf-8'))
    raise TypeError(f'stream keys are ints or strings, got {type(key)}')


def seed_sequence(seed: int, *keys: Key) -> np.random.SeedSequence:
    return np.random.SeedSequence([_word(seed), *(_word(k) for k in keys)])


def stream(seed: int, *keys: Key) -> np.random.Generator:
    """Counter-based generator for ``(seed, *keys)``."""
    return np.random.Generator(np.random.Philox(seed_sequence(seed, *keys)))
