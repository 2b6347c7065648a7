"""Scalar prior families with analytically tractable noisy marginals.

Two families are supported:

* ``Laplacian(scale=b)`` with density ``exp(-|u|/b) / (2b)``.
* ``GaussianMixture(weights, means, variances)``.

Both admit closed forms for the Gaussian-smoothed marginal, its score,
and the posterior mean, which the denoisers in
:mod:`denoisekit.scalar` rely on.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["Laplacian", "GaussianMixture", "ScalarPrior", "prior_from_config"]


@dataclass(frozen=True)
class Laplacian:
    """Double-exponential prior with scale ``b > 0``."""

    scale: float = 1.0

    def __post_init__(self) -> None:
        if not (self.scale > 0 and np.isfinite(self.scale)):
            raise ValueError(f"scale must be positive and finite, got {self.scale}")

    def log_density(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=np.float64)
        return -np.abs(u) / self.scale - np.log(2.0 * self.scale)

    def support_radius(self) -> float:
        # Density below ~1e-18 of its peak beyond this point.
        return 42.0 * self.scale


@dataclass(frozen=True)
class GaussianMixture:
    """Finite Gaussian mixture prior.

    ``weights`` must be positive and sum to 1 within 1e-12;
    ``variances`` must be strictly positive.
    """

    weights: tuple[float, ...] = field(default=(1.0,))
    means: tuple[float, ...] = field(default=(0.0,))
    variances: tuple[float, ...] = field(default=(1.0,))

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=np.float64)
        m = np.asarray(self.means, dtype=np.float64)
        v = np.asarray(self.variances, dtype=np.float64)
        if not (w.ndim == m.ndim == v.ndim == 1) or not (len(w) == len(m) == len(v)):
            raise ValueError("weights, means, variances must be 1D of equal length")
        if len(w) == 0:
            raise ValueError("mixture must have at least one component")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise ValueError("weights must be positive and finite")
        if abs(float(w.sum()) - 1.0) > 1e-12:
            raise ValueError(f"weights must sum to 1 within 1e-12, got {w.sum()!r}")
        if not np.all(np.isfinite(m)):
            raise ValueError("means must be finite")
        if not np.all(np.isfinite(v)) or np.any(v <= 0):
            raise ValueError("variances must be positive and finite")
        object.__setattr__(self, "weights", tuple(float(x) for x in w))
        object.__setattr__(self, "means", tuple(float(x) for x in m))
        object.__setattr__(self, "variances", tuple(float(x) for x in v))

    @property
    def n_components(self) -> int:
        return len(self.weights)

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return (
            np.asarray(self.weights, dtype=np.float64),
            np.asarray(self.means, dtype=np.float64),
            np.asarray(self.variances, dtype=np.float64),
        )

    def log_density(self, u) -> np.ndarray:
        from scipy.special import logsumexp

        u = np.asarray(u, dtype=np.float64)
        w, m, v = self.arrays()
        z = u[..., None] - m
        comp = -0.5 * z * z / v - 0.5 * np.log(2.0 * np.pi * v) + np.log(w)
        return logsumexp(comp, axis=-1)

    def mean(self) -> float:
        w, m, _ = self.arrays()
        return float(np.dot(w, m))

    def variance(self) -> float:
        w, m, v = self.arrays()
        mu = self.mean()
        return float(np.dot(w, v + (m - mu) ** 2))

    def support_radius(self) -> float:
        _, m, v = self.arrays()
        return float(np.max(np.abs(m)) + 12.0 * np.sqrt(v.max()))


ScalarPrior = Laplacian | GaussianMixture


def prior_from_config(cfg: dict) -> ScalarPrior:
    """Build a prior from a JSON-style mapping.

    Either ``{"laplacian": {"scale": b}}`` or
    ``{"gmm": {"w": [...], "mu": [...], "var": [...]}}``.
    """
    if not isinstance(cfg, dict) or len(cfg) != 1:
        raise ValueError("prior config must have exactly one top-level key")
    kind, params = next(iter(cfg.items()))
    if not isinstance(params, dict):
        raise ValueError(f"prior parameters for {kind!r} must be a mapping")
    if kind == "laplacian":
        unknown = set(params) - {"scale"}
        if unknown:
            raise ValueError(f"unknown laplacian keys: {sorted(unknown)}")
        return Laplacian(scale=float(params.get("scale", 1.0)))
    if kind == "gmm":
        unknown = set(params) - {"w", "mu", "var"}
        if unknown:
            raise ValueError(f"unknown gmm keys: {sorted(unknown)}")
        try:
            return GaussianMixture(
                weights=tuple(params["w"]),
                means=tuple(params["mu"]),
                variances=tuple(params["var"]),
            )
        except KeyError as exc:
            raise ValueError(f"gmm config missing {exc.args[0]!r}") from exc
    raise ValueError(f"unknown prior kind {kind!r}")
