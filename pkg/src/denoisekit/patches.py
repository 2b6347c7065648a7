"""Patch extraction and pairwise patch distances.

A patch of radius ``r`` around element ``i`` is the (2r+1)-long window
(1D) or (2r+1) x (2r+1) block (2D) centered at ``i``, with out-of-range
indices clamped to the nearest edge (edge replication).  Patches are
flattened row-major into a fixed offset order so any two backends that
consume the patch matrix agree on summation order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .signal import as_signal

__all__ = ["PatchConfig", "extract_patches", "patch_distance", "window_structure"]

FULL_SEARCH = None  # sentinel: compare every pair of elements


@dataclass(frozen=True)
class PatchConfig:
    """Geometry of the patch comparison.

    ``search_radius`` limits comparisons to a Chebyshev window of that
    radius around each element; ``None`` means full search (all pairs).
    """

    patch_radius: int = 1
    search_radius: int | None = None

    def __post_init__(self) -> None:
        if self.patch_radius < 0:
            raise ValueError(f"patch_radius must be >= 0, got {self.patch_radius}")
        if self.search_radius is not None and self.search_radius < 1:
            raise ValueError(f"search_radius must be >= 1, got {self.search_radius}")


def extract_patches(x, patch_radius: int) -> np.ndarray:
    """Return the (N, P) matrix of edge-replicated, flattened patches.

    Rows follow the row-major element order of ``x``; columns follow
    row-major offset order, so ``patch_radius = 0`` degenerates to the
    element values themselves.
    """
    arr = as_signal(x)
    r = int(patch_radius)
    if r < 0:
        raise ValueError("patch_radius must be >= 0")
    offsets = np.arange(-r, r + 1)
    if arr.ndim == 1:
        n = arr.shape[0]
        idx = np.clip(np.arange(n)[:, None] + offsets[None, :], 0, n - 1)
        return arr[idx]
    rows, cols = arr.shape
    ri = np.clip(np.arange(rows)[:, None] + offsets[None, :], 0, rows - 1)
    ci = np.clip(np.arange(cols)[:, None] + offsets[None, :], 0, cols - 1)
    # (rows, cols, 2r+1, 2r+1) block per element, flattened row-major.
    block = arr[ri[:, None, :, None], ci[None, :, None, :]]
    return block.reshape(rows * cols, (2 * r + 1) ** 2)


def patch_distance(x, i: int, j: int, cfg: PatchConfig, norm: str = "l2sq") -> float:
    """Distance between the patches at flat indices ``i`` and ``j``.

    ``norm`` is ``"l2sq"`` (squared Euclidean) or ``"l1"``.
    """
    arr = as_signal(x)
    n = arr.size
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"indices ({i}, {j}) out of range for size {n}")
    patches = extract_patches(arr, cfg.patch_radius)
    diff = patches[i] - patches[j]
    if norm == "l2sq":
        return float(np.dot(diff, diff))
    if norm == "l1":
        return float(np.sum(np.abs(diff)))
    raise ValueError(f"unknown norm {norm!r}")


def window_structure(shape, search_radius: int) -> tuple[np.ndarray, np.ndarray]:
    """CSR skeleton (indptr, indices) of the search-window sparsity.

    Element ``i`` is paired with every ``j`` whose coordinates differ by
    at most ``search_radius`` per axis (including ``j == i``).  Column
    indices are ascending within each row, and the relation is
    symmetric, so the skeleton is structurally symmetric.
    """
    s = int(search_radius)
    if s < 1:
        raise ValueError("search_radius must be >= 1")
    if len(shape) == 1:
        (n,) = shape
        lo = np.maximum(np.arange(n) - s, 0)
        hi = np.minimum(np.arange(n) + s, n - 1)
        counts = hi - lo + 1
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(counts, out=indptr[1:])
        indices = np.concatenate([np.arange(a, b + 1) for a, b in zip(lo, hi)])
        return indptr, indices.astype(np.int64)
    rows, cols = shape
    rlo = np.maximum(np.arange(rows) - s, 0)
    rhi = np.minimum(np.arange(rows) + s, rows - 1)
    clo = np.maximum(np.arange(cols) - s, 0)
    chi = np.minimum(np.arange(cols) + s, cols - 1)
    rcnt = (rhi - rlo + 1).astype(np.int64)
    ccnt = (chi - clo + 1).astype(np.int64)
    counts = (rcnt[:, None] * ccnt[None, :]).ravel()
    n = rows * cols
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    indices = np.empty(indptr[-1], dtype=np.int64)
    col_ranges = [np.arange(clo[c], chi[c] + 1, dtype=np.int64) for c in range(cols)]
    pos = 0
    for r in range(rows):
        row_ids = np.arange(rlo[r], rhi[r] + 1, dtype=np.int64) * cols
        for c in range(cols):
            js = (row_ids[:, None] + col_ranges[c][None, :]).ravel()
            indices[pos : pos + js.size] = js
            pos += js.size
    return indptr, indices
