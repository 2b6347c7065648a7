"""Deterministic random number generation.

All stochastic operations in the package draw from a counter-based
Philox bit generator seeded through :class:`numpy.random.SeedSequence`.
Gaussian variates are produced by inverse-CDF transform of open-interval
uniforms rather than by rejection sampling, so a given (seed, shape)
pair maps to one fixed bit pattern: identical seeds and call sequences
reproduce identical streams, and per-sample child streams can be run in
any order or in parallel without changing results.
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtri

__all__ = ["make_rng", "spawn_rngs", "standard_normal", "gaussian"]

# Uniform draws use 53-bit integers mapped to the open interval (0, 1)
# via (k + 0.5) / 2**53, keeping ndtri away from its endpoint poles.
_U53 = float(2**53)


def make_rng(seed: int) -> np.random.Generator:
    """Return the root generator for ``seed`` (Philox, counter-based)."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def spawn_rngs(seed: int, n: int) -> list[np.random.Generator]:
    """Return ``n`` independent child generators of ``seed``.

    Child ``i`` depends only on ``(seed, i)``, never on ``n``, so the
    stream assigned to one sample is stable no matter how many samples
    a run requests.
    """
    children = np.random.SeedSequence(seed).spawn(n)
    return [np.random.Generator(np.random.Philox(child)) for child in children]


def _open_uniform(rng: np.random.Generator, shape) -> np.ndarray:
    k = rng.integers(0, 2**53, size=shape, dtype=np.uint64)
    return (k.astype(np.float64) + 0.5) / _U53


def standard_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """Standard normal variates via the inverse Gaussian CDF."""
    return ndtri(_open_uniform(rng, shape))


def gaussian(rng: np.random.Generator, shape, sigma: float) -> np.ndarray:
    """Zero-mean Gaussian variates with standard deviation ``sigma``."""
    return sigma * standard_normal(rng, shape)
