"""Uniform callable wrapper for denoisers.

A :class:`DenoiserHandle` packages ``f(x, alpha) -> x_hat`` with the
metadata that downstream machinery needs: a name, an optional fixed
dimensionality, whether the map acts elementwise (so batches can be
pushed through a single call), and optional exact Jacobian information
(a matrix for linear maps, a pointwise derivative for separable ones).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = ["DenoiserHandle", "linear_handle", "with_alpha"]


@dataclass(frozen=True)
class DenoiserHandle:
    """Named denoiser ``evaluate(x, alpha)``.

    ``dim`` is the required element count, or ``None`` for any shape.
    ``separable`` marks elementwise maps.  ``jacobian_diag(x, alpha)``
    (separable) or ``jacobian_matrix(x, alpha)`` (when cheap/exact) are
    optional; consumers fall back to finite differences without them.
    """

    name: str
    fn: Callable[[np.ndarray, float], np.ndarray]
    dim: int | None = None
    separable: bool = False
    jacobian_diag: Callable[[np.ndarray, float], np.ndarray] | None = None
    jacobian_matrix: Callable[[np.ndarray, float], np.ndarray] | None = None
    meta: dict = field(default_factory=dict)

    def evaluate(self, x, alpha: float) -> np.ndarray:
        arr = np.asarray(x, dtype=np.float64)
        if self.dim is not None and arr.size != self.dim:
            raise ValueError(
                f"denoiser {self.name!r} expects {self.dim} elements, got {arr.size}"
            )
        out = np.asarray(self.fn(arr, float(alpha)), dtype=np.float64)
        if out.shape != arr.shape:
            raise ValueError(
                f"denoiser {self.name!r} changed shape {arr.shape} -> {out.shape}"
            )
        return out

    def __call__(self, x, alpha: float) -> np.ndarray:
        return self.evaluate(x, alpha)

    def jvp(self, x, alpha: float, v: np.ndarray, h: float = 1e-6) -> np.ndarray:
        """Jacobian-vector product, exact when metadata allows.

        Falls back to a central difference along ``v``.  For symmetric
        Jacobians this equals the vector-Jacobian product as well.
        """
        arr = np.asarray(x, dtype=np.float64)
        vec = np.asarray(v, dtype=np.float64)
        if self.jacobian_diag is not None:
            return self.jacobian_diag(arr, alpha) * vec
        if self.jacobian_matrix is not None:
            mat = self.jacobian_matrix(arr, alpha)
            return (mat @ vec.ravel()).reshape(arr.shape)
        norm = float(np.linalg.norm(vec.ravel()))
        if norm == 0.0:
            return np.zeros_like(arr)
        unit = vec / norm
        fp = self.evaluate(arr + h * unit, alpha)
        fm = self.evaluate(arr - h * unit, alpha)
        return (fp - fm) * (norm / (2.0 * h))


def linear_handle(name: str, matrix, symmetric: bool | None = None) -> DenoiserHandle:
    """Handle for a fixed linear map ``x -> M x`` (alpha is ignored)."""
    from .weights import WeightMatrix

    if isinstance(matrix, WeightMatrix):
        mat = matrix.matrix
    else:
        mat = matrix
    n = mat.shape[0]

    def fn(x: np.ndarray, alpha: float) -> np.ndarray:
        return np.asarray(mat @ x.ravel()).reshape(x.shape)

    def jac(x: np.ndarray, alpha: float) -> np.ndarray:
        import scipy.sparse as sp

        return mat.toarray() if sp.issparse(mat) else np.asarray(mat)

    return DenoiserHandle(
        name=name,
        fn=fn,
        dim=n,
        separable=False,
        jacobian_matrix=jac,
        meta={"linear": True, "symmetric": symmetric},
    )


def with_alpha(handle: DenoiserHandle, alpha: float) -> DenoiserHandle:
    """Pin a handle to a fixed noise level, ignoring the passed alpha."""
    pinned = float(alpha)
    return DenoiserHandle(
        name=f"{handle.name}@alpha={pinned:g}",
        fn=lambda x, _a: handle.fn(x, pinned),
        dim=handle.dim,
        separable=handle.separable,
        jacobian_diag=(
            None
            if handle.jacobian_diag is None
            else lambda x, _a: handle.jacobian_diag(x, pinned)
        ),
        jacobian_matrix=(
            None
            if handle.jacobian_matrix is None
            else lambda x, _a: handle.jacobian_matrix(x, pinned)
        ),
        meta=dict(handle.meta),
    )
