"""Multiscale decomposition by repeated denoising.

Applying a denoiser ``n`` times splits a signal into a coarse base
``f^n(x)`` plus detail layers ``r_k = f^k(x) - f^(k+1)(x)``; the split
telescopes, so summing everything back reproduces the input to machine
precision.  ``recombine`` reweights the layers (boosting, suppression,
band selection) with the same fixed fine-to-coarse summation order, so
unit coefficients reproduce ``reconstruct`` bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["Decomposition", "decompose", "reconstruct", "recombine"]


@dataclass(frozen=True)
class Decomposition:
    """Detail layers (fine to coarse) plus the coarse base.

    ``residuals[k]`` holds ``f^k(x) - f^(k+1)(x)``; ``base`` holds
    ``f^n(x)``; ``alpha`` is the noise level passed to every
    application.
    """

    residuals: tuple[np.ndarray, ...]
    base: np.ndarray
    alpha: float

    @property
    def depth(self) -> int:
        return len(self.residuals)


def decompose(f, x, alpha: float, depth: int) -> Decomposition:
    """Split ``x`` into ``depth`` detail layers plus a base.

    ``f`` is a denoiser handle or callable ``f(x, alpha)``.  Each level
    re-applies the denoiser to the previous output (weights re-adapt for
    input-dependent denoisers).
    """
    if depth < 1:
        raise ValueError(f"depth must be >= 1, got {depth}")
    current = np.asarray(x, dtype=np.float64).copy()
    residuals = []
    for _ in range(depth):
        denoised = np.asarray(f(current, alpha), dtype=np.float64)
        if denoised.shape != current.shape:
            raise ValueError("denoiser changed the signal shape")
        residuals.append(current - denoised)
        current = denoised
    return Decomposition(tuple(residuals), current, float(alpha))


def reconstruct(decomposition: Decomposition) -> np.ndarray:
    """Sum the layers back together: fine residuals first, base last.

    The summation order is fixed so repeated runs are bit-identical.
    """
    out = np.zeros_like(decomposition.base)
    for residual in decomposition.residuals:
        out += residual
    out += decomposition.base
    return out


def recombine(
    decomposition: Decomposition,
    residual_coefficients,
    base_coefficient: float = 1.0,
) -> np.ndarray:
    """Weighted recombination of the layers.

    ``residual_coefficients`` has one weight per detail layer.  The
    accumulation order matches :func:`reconstruct` exactly, so all-ones
    coefficients reproduce it bit for bit.
    """
    coeff = np.asarray(residual_coefficients, dtype=np.float64)
    if coeff.shape != (decomposition.depth,):
        raise ValueError(
            f"expected {decomposition.depth} residual coefficients, got {coeff.shape}"
        )
    out = np.zeros_like(decomposition.base)
    for c, residual in zip(coeff, decomposition.residuals):
        out += c * residual
    out += float(base_coefficient) * decomposition.base
    return out
