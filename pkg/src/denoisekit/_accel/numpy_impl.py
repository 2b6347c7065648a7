"""Vectorized NumPy fallback for pairwise patch distances.

Mirrors the contract of the compiled ``_core`` module.  Dense squared-L2
uses the Gram expansion ``|a - b|^2 = |a|^2 + |b|^2 - 2 a.b`` (clipped at
zero and mirrored for exact symmetry); the windowed path subtracts
gathered patch rows directly, which is symmetric by construction.
"""

from __future__ import annotations

import numpy as np

_L1_CHUNK = 256


def dense_distance(patches: np.ndarray, norm_code: int) -> np.ndarray:
    n = patches.shape[0]
    if norm_code == 0:
        sq = np.einsum("ij,ij->i", patches, patches)
        gram = patches @ patches.T
        dist = sq[:, None] + sq[None, :] - 2.0 * gram
        np.maximum(dist, 0.0, out=dist)
    else:
        dist = np.empty((n, n), dtype=np.float64)
        for start in range(0, n, _L1_CHUNK):
            stop = min(start + _L1_CHUNK, n)
            block = np.abs(patches[start:stop, None, :] - patches[None, :, :])
            dist[start:stop] = block.sum(axis=2)
    # Mirror the upper triangle so the matrix is exactly symmetric.
    upper = np.triu(dist, 1)
    out = upper + upper.T
    np.fill_diagonal(out, 0.0)
    return out


def windowed_distance(
    patches: np.ndarray,
    indptr: np.ndarray,
    indices: np.ndarray,
    norm_code: int,
) -> np.ndarray:
    n = patches.shape[0]
    row_of = np.repeat(np.arange(n), np.diff(indptr))
    diff = patches[row_of] - patches[indices]
    if norm_code == 0:
        return np.einsum("ij,ij->i", diff, diff)
    return np.sum(np.abs(diff), axis=1)
