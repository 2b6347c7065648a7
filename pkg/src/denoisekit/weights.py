"""Pseudo-linear denoising weights and their symmetrizations.

A kernel matrix ``K`` becomes a smoothing operator in three ways:

* ``normalize_rows``: ``W = D^-1 K`` (row-stochastic, not symmetric),
* ``sinkhorn_symmetrize``: diagonal scaling ``W = diag(u) K diag(u)``
  that is symmetric and doubly stochastic,
* ``taylor_symmetrize``: the first-order correction
  ``W = I + beta (K - D)`` with ``1/beta`` the mean row sum, which is
  symmetric with exact unit row sums but may carry small negative
  entries.

``apply_pseudo_linear`` evaluates ``x -> W x`` on flattened signals.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .kernels import KernelMatrix

__all__ = [
    "WeightMatrix",
    "normalize_rows",
    "sinkhorn_symmetrize",
    "taylor_symmetrize",
    "apply_pseudo_linear",
]


@dataclass(frozen=True)
class WeightMatrix:
    """Smoothing weights with declared stochasticity.

    ``stochasticity`` is ``"row"`` or ``"doubly"``; ``symmetric``
    records whether the construction guarantees symmetry.
    """

    matrix: np.ndarray | sp.csr_matrix
    stochasticity: str
    symmetric: bool

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self.matrix)

    def toarray(self) -> np.ndarray:
        if self.is_sparse:
            return self.matrix.toarray()
        return np.asarray(self.matrix)

    def dot(self, v: np.ndarray) -> np.ndarray:
        return np.asarray(self.matrix @ v)

    def row_sums(self) -> np.ndarray:
        if self.is_sparse:
            return np.asarray(self.matrix.sum(axis=1)).ravel()
        return self.matrix.sum(axis=1)

    def col_sums(self) -> np.ndarray:
        if self.is_sparse:
            return np.asarray(self.matrix.sum(axis=0)).ravel()
        return self.matrix.sum(axis=0)

    def validate(self, row_tol: float = 1e-10, col_tol: float = 1e-8) -> None:
        """Assert the declared stochasticity within the given tolerances."""
        if np.max(np.abs(self.row_sums() - 1.0)) > row_tol:
            raise ValueError("row sums deviate from 1 beyond tolerance")
        if self.stochasticity == "doubly":
            if np.max(np.abs(self.col_sums() - 1.0)) > col_tol:
                raise ValueError("column sums deviate from 1 beyond tolerance")
        elif self.stochasticity != "row":
            raise ValueError(f"unknown stochasticity {self.stochasticity!r}")
        if self.symmetric:
            dense = self.toarray()
            if not np.array_equal(dense, dense.T):
                raise ValueError("matrix declared symmetric but is not")


def _as_matrix(kernel: KernelMatrix | np.ndarray | sp.spmatrix):
    if isinstance(kernel, KernelMatrix):
        return kernel.matrix
    return kernel


def normalize_rows(kernel) -> tuple[WeightMatrix, np.ndarray]:
    """Row-normalize ``K`` to ``W = D^-1 K``; returns ``(W, row_sums)``.

    Raises ``ValueError`` on a zero row (empty neighborhoods cannot be
    normalized).
    """
    mat = _as_matrix(kernel)
    if sp.issparse(mat):
        d = np.asarray(mat.sum(axis=1)).ravel()
        if np.any(d <= 0):
            raise ValueError("kernel matrix has a nonpositive row sum")
        w = sp.diags(1.0 / d) @ mat.tocsr()
        return WeightMatrix(w.tocsr(), "row", False), d
    dense = np.asarray(mat, dtype=np.float64)
    d = dense.sum(axis=1)
    if np.any(d <= 0):
        raise ValueError("kernel matrix has a nonpositive row sum")
    return WeightMatrix(dense / d[:, None], "row", False), d


def sinkhorn_symmetrize(
    kernel,
    tol: float = 1e-10,
    max_iter: int = 50000,
) -> tuple[WeightMatrix, int]:
    """Symmetric Sinkhorn balancing of a symmetric kernel matrix.

    Finds the positive diagonal scaling ``u`` with
    ``u_i * (K u)_i = 1`` via the damped fixed point
    ``u <- sqrt(u / (K u))``, so ``W = diag(u) K diag(u)`` is symmetric
    (exactly, by construction) and doubly stochastic within ``tol``.
    Returns ``(W, iterations)``; raises ``ValueError`` if the imbalance
    has not dropped below ``tol`` after ``max_iter`` sweeps.
    """
    mat = _as_matrix(kernel)
    n = mat.shape[0]
    u = np.ones(n, dtype=np.float64)
    sparse = sp.issparse(mat)
    if sparse:
        mat = mat.tocsr()
    iterations = 0
    for iterations in range(1, max_iter + 1):
        ku = np.asarray(mat @ u).ravel()
        if np.any(ku <= 0) or not np.all(np.isfinite(ku)):
            raise ValueError("Sinkhorn iterate left the positive cone")
        imbalance = float(np.max(np.abs(u * ku - 1.0)))
        if imbalance <= tol:
            break
        u = np.sqrt(u / ku)
    else:
        raise ValueError(
            f"Sinkhorn did not converge in {max_iter} iterations "
            f"(imbalance {imbalance:.3e} > tol {tol:.1e})"
        )
    if sparse:
        w = (sp.diags(u) @ mat @ sp.diags(u)).tocsr()
        # Enforce exact symmetry in stored values: average with the
        # transpose (values already agree to rounding).
        w = ((w + w.T) * 0.5).tocsr()
    else:
        scaled = u[:, None] * np.asarray(mat) * u[None, :]
        upper = np.triu(scaled)
        w = upper + np.triu(scaled, 1).T
    return WeightMatrix(w, "doubly", True), iterations


def taylor_symmetrize(kernel, row_sums: np.ndarray | None = None) -> WeightMatrix:
    """First-order symmetrization ``W = I + beta (K - D)``.

    ``beta`` is the reciprocal of the mean row sum.  Row sums of ``W``
    are exactly 1 by cancellation and symmetry is inherited from ``K``;
    entries may be slightly negative where a row sum exceeds the mean.
    """
    mat = _as_matrix(kernel)
    if row_sums is None:
        if sp.issparse(mat):
            row_sums = np.asarray(mat.sum(axis=1)).ravel()
        else:
            row_sums = np.asarray(mat).sum(axis=1)
    beta = 1.0 / float(np.mean(row_sums))
    if sp.issparse(mat):
        core = (mat - sp.diags(row_sums)) * beta
        w = (sp.eye(mat.shape[0], format="csr") + core.tocsr()).tocsr()
    else:
        w = beta * np.asarray(mat, dtype=np.float64)
        # Off-diagonal entries are beta * K_ij (symmetric); the diagonal
        # becomes 1 + beta (K_ii - d_i).
        np.fill_diagonal(w, np.diagonal(w) + (1.0 - beta * row_sums))
    return WeightMatrix(w, "row", True)


def apply_pseudo_linear(weights: WeightMatrix, x) -> np.ndarray:
    """Evaluate ``W @ x`` on the row-major flattening of ``x``."""
    arr = np.asarray(x, dtype=np.float64)
    flat = arr.ravel()
    if flat.size != weights.n:
        raise ValueError(f"signal size {flat.size} does not match W ({weights.n})")
    return weights.dot(flat).reshape(arr.shape)
