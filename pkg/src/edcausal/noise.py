"""Counter-based exogenous noise.

The uniform for (seed, unit, stream) is the ``unit``-th double produced by a Philox
4x64 generator keyed on ``(seed, stream)``: each Philox counter step yields four
64-bit words and a double is ``(word >> 11) * 2**-53``. A block of units
``[start, stop)`` therefore starts at counter ``start // 4``, which makes every
value independent of how the unit range is partitioned.

Gaussian noise uses the Box-Muller cosine branch on two uniform streams:
``z = sqrt(-2 log(1 - u1)) * cos(2 pi u2)``.
"""
from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def uniforms(seed: int, stream: int, start: int, stop: int) -> np.ndarray:
    if seed < 0 or seed > _MASK64:
        raise ValueError("seed must be an integer in [0, 2**64)")
    if stop < start:
        raise ValueError("empty or reversed unit range")
    skip = start % 4
    bitgen = np.random.Philox(key=[seed, stream], counter=[start // 4, 0, 0, 0])
    return np.random.Generator(bitgen).random(stop - start + skip)[skip:]


def standard_normals(seed: int, stream: int, start: int, stop: int) -> np.ndarray:
    u1 = uniforms(seed, 2 * stream, start, stop)
    u2 = uniforms(seed, 2 * stream + 1, start, stop)
    return np.sqrt(-2.0 * np.log1p(-u1)) * np.cos(2.0 * np.pi * u2)


def replicate_rng(seed: int, index: int) -> np.random.Generator:
    """Independent generator for replicate ``index`` of a seeded procedure."""
    return np.random.default_rng(np.random.SeedSequence([seed, index]))
