"""Noise-level schedules for flow-based sampling.

A schedule is a strictly decreasing positive sequence of variances
``alpha_T > ... > alpha_0`` traversed from the largest level down.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["NoiseSchedule"]


@dataclass(frozen=True)
class NoiseSchedule:
    """Descending variance ladder.

    ``alphas[0]`` is the starting (largest) level ``alpha_T``;
    ``alphas[-1]`` is the terminal level ``alpha_0``.
    """

    alphas: tuple[float, ...]

    def __post_init__(self) -> None:
        arr = np.asarray(self.alphas, dtype=np.float64)
        if arr.ndim != 1 or arr.size < 1:
            raise ValueError("schedule needs at least one level")
        if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
            raise ValueError("schedule levels must be positive and finite")
        if arr.size > 1 and not np.all(np.diff(arr) < 0):
            raise ValueError("schedule levels must be strictly decreasing")
        object.__setattr__(self, "alphas", tuple(float(a) for a in arr))

    @property
    def steps(self) -> int:
        return len(self.alphas) - 1

    @property
    def alpha_start(self) -> float:
        return self.alphas[0]

    @property
    def alpha_end(self) -> float:
        return self.alphas[-1]

    def pairs(self):
        """Iterate ``(alpha_t, alpha_prev)`` from coarse to fine."""
        for t in range(self.steps):
            yield self.alphas[t], self.alphas[t + 1]

    @classmethod
    def geometric(cls, alpha_max: float, alpha_min: float, steps: int) -> "NoiseSchedule":
        """Geometric ladder with ``steps`` intervals (``steps + 1`` levels)."""
        if steps < 0:
            raise ValueError("steps must be >= 0")
        if steps == 0:
            return cls((float(alpha_max),))
        if not (alpha_max > alpha_min > 0):
            raise ValueError("need alpha_max > alpha_min > 0")
        return cls(tuple(np.geomspace(alpha_max, alpha_min, steps + 1)))

    @classmethod
    def linear_in_sigma(
        cls, sigma_max: float, sigma_min: float, steps: int
    ) -> "NoiseSchedule":
        """Standard deviation decreases linearly; variances follow."""
        if steps < 0:
            raise ValueError("steps must be >= 0")
        if steps == 0:
            return cls((float(sigma_max) ** 2,))
        if not (sigma_max > sigma_min > 0):
            raise ValueError("need sigma_max > sigma_min > 0")
        sigmas = np.linspace(sigma_max, sigma_min, steps + 1)
        return cls(tuple(sigmas * sigmas))

    @classmethod
    def explicit(cls, alphas) -> "NoiseSchedule":
        return cls(tuple(float(a) for a in alphas))
