"""Linear forward operators with exact adjoints.

Every operator maps a flat signal of length ``n`` to measurements of
length ``m`` and implements the matching adjoint.  Adjoint consistency
``<H x, z> == <x, H^T z>`` is testable on random probes via
``adjoint_mismatch``.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "ForwardOperator",
    "IdentityOperator",
    "MaskOperator",
    "CircularConvolutionOperator",
    "MatrixOperator",
    "adjoint_mismatch",
    "operator_from_config",
]


class ForwardOperator:
    """Base class: subclasses define ``apply`` and ``adjoint``."""

    shape: tuple[int, int]  # (m, n)

    def apply(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def adjoint(self, z: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def gram(self, x: np.ndarray) -> np.ndarray:
        """``H^T H x`` (convenience for normal-equation solves)."""
        return self.adjoint(self.apply(x))

    def dense(self) -> np.ndarray:
        """Materialize the operator column by column (small problems)."""
        m, n = self.shape
        out = np.empty((m, n), dtype=np.float64)
        basis = np.zeros(n)
        for k in range(n):
            basis[k] = 1.0
            out[:, k] = self.apply(basis)
            basis[k] = 0.0
        return out

    def _check_input(self, x, size: int, what: str) -> np.ndarray:
        arr = np.asarray(x, dtype=np.float64).ravel()
        if arr.size != size:
            raise ValueError(f"{what} must have {size} elements, got {arr.size}")
        return arr


class IdentityOperator(ForwardOperator):
    def __init__(self, n: int):
        if n < 1:
            raise ValueError("n must be >= 1")
        self.shape = (n, n)

    def apply(self, x):
        return self._check_input(x, self.shape[1], "signal").copy()

    def adjoint(self, z):
        return self._check_input(z, self.shape[0], "measurement").copy()


class MaskOperator(ForwardOperator):
    """Subsampling: keep the listed flat indices, in the given order."""

    def __init__(self, n: int, kept_indices):
        idx = np.asarray(kept_indices, dtype=np.int64).ravel()
        if idx.size == 0:
            raise ValueError("mask must keep at least one element")
        if np.any(idx < 0) or np.any(idx >= n):
            raise ValueError("mask indices out of range")
        if np.unique(idx).size != idx.size:
            raise ValueError("mask indices must be unique")
        self.kept = idx
        self.shape = (idx.size, n)

    def apply(self, x):
        return self._check_input(x, self.shape[1], "signal")[self.kept]

    def adjoint(self, z):
        arr = self._check_input(z, self.shape[0], "measurement")
        out = np.zeros(self.shape[1], dtype=np.float64)
        out[self.kept] = arr
        return out


class CircularConvolutionOperator(ForwardOperator):
    """Circular convolution with a centered odd-length tap vector.

    ``y_i = sum_k taps[k] * x[(i + k - c) mod n]`` with ``c`` the center
    tap; the adjoint is circular correlation, i.e. convolution with the
    reversed taps.  Implemented by rolled accumulation, so the adjoint
    is exact to rounding.
    """

    def __init__(self, n: int, taps):
        t = np.asarray(taps, dtype=np.float64).ravel()
        if t.size % 2 != 1:
            raise ValueError("taps must have odd length (centered kernel)")
        if t.size > n:
            raise ValueError("taps longer than the signal")
        if not np.all(np.isfinite(t)):
            raise ValueError("taps must be finite")
        self.taps = t
        self.shape = (n, n)

    def _convolve(self, x: np.ndarray, taps: np.ndarray) -> np.ndarray:
        c = taps.size // 2
        out = np.zeros_like(x)
        for k, t in enumerate(taps):
            out += t * np.roll(x, c - k)
        return out

    def apply(self, x):
        arr = self._check_input(x, self.shape[1], "signal")
        return self._convolve(arr, self.taps)

    def adjoint(self, z):
        arr = self._check_input(z, self.shape[0], "measurement")
        return self._convolve(arr, self.taps[::-1])


class MatrixOperator(ForwardOperator):
    def __init__(self, matrix):
        mat = np.asarray(matrix, dtype=np.float64)
        if mat.ndim != 2:
            raise ValueError("matrix operator needs a 2D array")
        self.matrix = mat
        self.shape = mat.shape

    def apply(self, x):
        return self.matrix @ self._check_input(x, self.shape[1], "signal")

    def adjoint(self, z):
        return self.matrix.T @ self._check_input(z, self.shape[0], "measurement")


def adjoint_mismatch(op: ForwardOperator, n_probes: int = 8, seed: int = 0) -> float:
    """Largest relative defect of ``<Hx, z> - <x, H^T z>`` over probes."""
    from .rng import make_rng, standard_normal

    rng = make_rng(seed)
    m, n = op.shape
    worst = 0.0
    for _ in range(n_probes):
        x = standard_normal(rng, (n,))
        z = standard_normal(rng, (m,))
        lhs = float(np.dot(op.apply(x), z))
        rhs = float(np.dot(x, op.adjoint(z)))
        scale = max(abs(lhs), abs(rhs), 1.0)
        worst = max(worst, abs(lhs - rhs) / scale)
    return worst


def operator_from_config(cfg: dict, n: int) -> ForwardOperator:
    """Build an operator from a JSON-style mapping.

    ``{"kind": "identity"}``, ``{"kind": "mask", "kept_indices": [...]}``,
    ``{"kind": "circular_convolution", "taps": [...]}``, or
    ``{"kind": "matrix", "matrix": [[...], ...]}``.
    """
    if not isinstance(cfg, dict) or "kind" not in cfg:
        raise ValueError("operator config must be a mapping with a 'kind'")
    kind = cfg["kind"]
    allowed = {
        "identity": set(),
        "mask": {"kept_indices"},
        "circular_convolution": {"taps"},
        "matrix": {"matrix"},
    }
    if kind not in allowed:
        raise ValueError(f"unknown operator kind {kind!r}")
    unknown = set(cfg) - allowed[kind] - {"kind"}
    if unknown:
        raise ValueError(f"unknown operator keys for {kind!r}: {sorted(unknown)}")
    if kind == "identity":
        return IdentityOperator(n)
    if kind == "mask":
        return MaskOperator(n, cfg["kept_indices"])
    if kind == "circular_convolution":
        return CircularConvolutionOperator(n, cfg["taps"])
    return MatrixOperator(cfg["matrix"])
