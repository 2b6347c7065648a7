"""Patch-based pseudo-linear denoising (non-local means family).

``nlm_denoise`` chains kernel construction, optional symmetrization,
and application: ``f(x, alpha) = W(x, alpha) x``.  The weights adapt to
the input, so the full map is nonlinear even though each application is
linear; ``nlm_weights`` exposes the weights themselves so callers can
freeze them into a genuinely linear operator.
"""

from __future__ import annotations

import numpy as np

from .kernels import build_kernel_matrix
from .patches import PatchConfig
from .weights import (
    WeightMatrix,
    apply_pseudo_linear,
    normalize_rows,
    sinkhorn_symmetrize,
    taylor_symmetrize,
)

__all__ = ["SYMMETRIZATIONS", "nlm_weights", "nlm_denoise"]

SYMMETRIZATIONS = ("none", "sinkhorn", "taylor")


def nlm_weights(
    x,
    alpha: float,
    cfg: PatchConfig | None = None,
    kind: str = "gaussian",
    symmetrization: str = "none",
    sinkhorn_tol: float = 1e-10,
    backend: str | None = None,
) -> WeightMatrix:
    """Smoothing weights adapted to ``x`` at bandwidth ``alpha``.

    ``symmetrization`` selects plain row normalization (``"none"``),
    Sinkhorn balancing (``"sinkhorn"``), or the first-order correction
    (``"taylor"``).
    """
    if symmetrization not in SYMMETRIZATIONS:
        raise ValueError(
            f"unknown symmetrization {symmetrization!r}; expected {SYMMETRIZATIONS}"
        )
    cfg = cfg or PatchConfig()
    kernel = build_kernel_matrix(x, cfg, kind=kind, alpha=alpha, backend=backend)
    if symmetrization == "none":
        weights, _ = normalize_rows(kernel)
        return weights
    if symmetrization == "sinkhorn":
        weights, _ = sinkhorn_symmetrize(kernel, tol=sinkhorn_tol)
        return weights
    _, row_sums = normalize_rows(kernel)
    return taylor_symmetrize(kernel, row_sums)


def nlm_denoise(
    x,
    alpha: float,
    cfg: PatchConfig | None = None,
    kind: str = "gaussian",
    symmetrization: str = "none",
    backend: str | None = None,
) -> np.ndarray:
    """Apply input-adapted smoothing weights to ``x`` itself."""
    weights = nlm_weights(
        x, alpha, cfg=cfg, kind=kind, symmetrization=symmetrization, backend=backend
    )
    return apply_pseudo_linear(weights, np.asarray(x, dtype=np.float64))
