"""Signal containers, noise synthesis, and fidelity metrics.

A signal is a finite float64 ndarray, one-dimensional for sequences or
two-dimensional for images, indexed row-major.  Values are nominally in
[0, 1] for image-like data but the library itself never clamps; range
enforcement happens only at I/O boundaries (see :mod:`denoisekit.fileio`).

The noise level is parameterized interchangeably by the standard
deviation ``sigma`` or the variance ``alpha = sigma**2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .rng import gaussian, make_rng

__all__ = ["NoiseSpec", "as_signal", "add_awgn", "mse", "psnr"]


@dataclass(frozen=True)
class NoiseSpec:
    """Additive white Gaussian noise level.

    ``alpha`` is derived from ``sigma`` so the identity
    ``alpha == sigma**2`` holds exactly.
    """

    sigma: float

    def __post_init__(self) -> None:
        if not (self.sigma >= 0.0 and math.isfinite(self.sigma)):
            raise ValueError(f"sigma must be finite and >= 0, got {self.sigma}")

    @property
    def alpha(self) -> float:
        return self.sigma**2

    @classmethod
    def from_sigma(cls, sigma: float) -> "NoiseSpec":
        return cls(float(sigma))

    @classmethod
    def from_alpha(cls, alpha: float) -> "NoiseSpec":
        if not (alpha >= 0.0 and math.isfinite(alpha)):
            raise ValueError(f"alpha must be finite and >= 0, got {alpha}")
        return cls(math.sqrt(alpha))


def as_signal(x) -> np.ndarray:
    """Validate and return ``x`` as a float64 signal array.

    Accepts 1D or 2D input with finite entries; anything else raises
    ``ValueError``.
    """
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim not in (1, 2):
        raise ValueError(f"signal must be 1D or 2D, got ndim={arr.ndim}")
    if arr.size == 0:
        raise ValueError("signal must be non-empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError("signal entries must be finite")
    return arr


def add_awgn(x, noise: NoiseSpec, seed: int) -> np.ndarray:
    """Return ``x`` plus seeded white Gaussian noise of level ``noise``.

    The draw is fully determined by ``(seed, x.shape, noise.sigma)``;
    the input is never modified.
    """
    arr = as_signal(x)
    rng = make_rng(seed)
    return arr + gaussian(rng, arr.shape, noise.sigma)


def mse(a, b) -> float:
    """Mean squared error between two signals of identical shape."""
    x = as_signal(a)
    y = as_signal(b)
    if x.shape != y.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {y.shape}")
    d = x - y
    return float(np.mean(d * d))


def psnr(a, b, peak: float = 1.0) -> float:
    """Peak signal-to-noise ratio in dB; ``inf`` when the signals match."""
    err = mse(a, b)
    if err == 0.0:
        return math.inf
    return 10.0 * math.log10(peak * peak / err)
