"""Residual-based anomaly detection with FDR control.

The denoising residual ``r = x - f(x, alpha)`` is modeled as Gaussian
with robustly estimated scale (median absolute deviation times 1.4826).
Per-element two-sided p-values are screened by the Benjamini-Hochberg
step-up rule at a configurable false-discovery rate.  The Gaussian
residual model is an assumption, not a theorem; the report carries the
scale estimate and threshold so callers can judge the fit.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

__all__ = ["AnomalyReport", "benjamini_hochberg", "detect_anomalies"]

_MAD_TO_SIGMA = 1.4826


@dataclass(frozen=True)
class AnomalyReport:
    """Flagged elements plus the evidence behind them.

    ``mask`` is boolean with the input shape; ``threshold`` is the
    largest raw p-value rejected by the step-up rule (0.0 when nothing
    was flagged); ``degenerate_scale`` marks the constant-residual edge
    case where no test was possible.
    """

    mask: np.ndarray
    z_scores: np.ndarray
    sigma_estimate: float
    threshold: float
    fdr_q: float
    degenerate_scale: bool = False

    @property
    def n_flagged(self) -> int:
        return int(self.mask.sum())


def benjamini_hochberg(p_values: np.ndarray, q: float) -> tuple[np.ndarray, float]:
    """Step-up FDR screen; returns ``(reject_mask, p_threshold)``."""
    if not (0.0 < q < 1.0):
        raise ValueError(f"q must be in (0, 1), got {q}")
    p = np.asarray(p_values, dtype=np.float64).ravel()
    m = p.size
    order = np.argsort(p, kind="stable")
    ranked = p[order]
    limits = q * np.arange(1, m + 1) / m
    below = ranked <= limits
    if not below.any():
        return np.zeros(m, dtype=bool), 0.0
    cutoff_rank = int(np.nonzero(below)[0].max())
    threshold = float(ranked[cutoff_rank])
    return p <= threshold, threshold


def detect_anomalies(x, f, alpha: float, fdr_q: float = 0.1) -> AnomalyReport:
    """Flag elements whose residual is implausibly large.

    ``f`` is a denoiser handle or callable.  A zero residual scale
    (constant residual) yields an empty mask and a warning rather than
    dividing by zero.
    """
    if not (0.0 < fdr_q < 1.0):
        raise ValueError(f"fdr_q must be in (0, 1), got {fdr_q}")
    arr = np.asarray(x, dtype=np.float64)
    denoised = np.asarray(f(arr, alpha), dtype=np.float64)
    residual = arr - denoised
    center = float(np.median(residual))
    mad = float(np.median(np.abs(residual - center)))
    sigma = _MAD_TO_SIGMA * mad
    if sigma == 0.0:
        warnings.warn(
            "residual scale is zero (constant residual); no anomaly test possible",
            RuntimeWarning,
            stacklevel=2,
        )
        return AnomalyReport(
            mask=np.zeros(arr.shape, dtype=bool),
            z_scores=np.zeros(arr.shape),
            sigma_estimate=0.0,
            threshold=0.0,
            fdr_q=float(fdr_q),
            degenerate_scale=True,
        )
    z = (residual - center) / sigma
    p = erfc(np.abs(z) / np.sqrt(2.0))
    mask_flat, threshold = benjamini_hochberg(p, fdr_q)
    return AnomalyReport(
        mask=mask_flat.reshape(arr.shape),
        z_scores=z,
        sigma_estimate=sigma,
        threshold=threshold,
        fdr_q=float(fdr_q),
    )
