"""Registry of ready-made denoisers.

Names map to factory functions taking keyword options, so both the CLI
and tests can instantiate denoisers from JSON-style configuration:

* ``identity``                      no-op baseline
* ``map_l1``                        soft threshold at the noise variance
* ``mmse`` / ``map``                scalar Bayesian denoisers; require a
                                    ``prior`` option (see
                                    :func:`denoisekit.priors.prior_from_config`)
* ``nlm``                           patch-kernel smoother; options
                                    ``kernel``, ``patch_radius``,
                                    ``search_radius``, ``symmetrization``
"""

from __future__ import annotations

import numpy as np

from . import scalar
from .handles import DenoiserHandle, linear_handle
from .nlm import nlm_denoise, nlm_weights
from .patches import PatchConfig
from .priors import ScalarPrior, prior_from_config

__all__ = [
    "registry_names",
    "make_denoiser",
    "identity_denoiser",
    "map_l1_denoiser",
    "mmse_denoiser",
    "map_denoiser",
    "nlm_denoiser",
    "frozen_nlm_handle",
]


def identity_denoiser() -> DenoiserHandle:
    return DenoiserHandle(
        name="identity",
        fn=lambda x, alpha: x.copy(),
        separable=True,
        jacobian_diag=lambda x, alpha: np.ones_like(x),
    )


def map_l1_denoiser() -> DenoiserHandle:
    def jac(x: np.ndarray, alpha: float) -> np.ndarray:
        return (np.abs(x) > alpha).astype(np.float64)

    return DenoiserHandle(
        name="map_l1",
        fn=lambda x, alpha: scalar.map_l1(x, alpha),
        separable=True,
        jacobian_diag=jac,
    )


def mmse_denoiser(prior: ScalarPrior) -> DenoiserHandle:
    return DenoiserHandle(
        name="mmse",
        fn=lambda x, alpha: scalar.mmse_denoise(x, alpha, prior).estimate,
        separable=True,
        jacobian_diag=lambda x, alpha: scalar.mmse_derivative(x, alpha, prior),
        meta={"prior": prior},
    )


def map_denoiser(prior: ScalarPrior) -> DenoiserHandle:
    return DenoiserHandle(
        name="map",
        fn=lambda x, alpha: np.asarray(scalar.map_denoise(x, alpha, prior)),
        separable=True,
        meta={"prior": prior},
    )


def _nlm_config(options: dict) -> tuple[PatchConfig, str, str]:
    kind = options.get("kernel", "gaussian")
    symmetrization = options.get("symmetrization", "none")
    search = options.get("search_radius", "full")
    search_radius = None if search in (None, "full") else int(search)
    cfg = PatchConfig(
        patch_radius=int(options.get("patch_radius", 1)),
        search_radius=search_radius,
    )
    return cfg, kind, symmetrization


def nlm_denoiser(**options) -> DenoiserHandle:
    cfg, kind, symmetrization = _nlm_config(options)

    def fn(x: np.ndarray, alpha: float) -> np.ndarray:
        return nlm_denoise(x, alpha, cfg=cfg, kind=kind, symmetrization=symmetrization)

    return DenoiserHandle(
        name=f"nlm[{kind},{symmetrization}]",
        fn=fn,
        separable=False,
        meta={"cfg": cfg, "kernel": kind, "symmetrization": symmetrization},
    )


def frozen_nlm_handle(x, alpha: float, **options) -> DenoiserHandle:
    """Linear handle with weights frozen from ``x`` at level ``alpha``.

    Freezing turns the input-adaptive smoother into a fixed operator
    whose Jacobian is the weight matrix itself.
    """
    cfg, kind, symmetrization = _nlm_config(options)
    weights = nlm_weights(x, alpha, cfg=cfg, kind=kind, symmetrization=symmetrization)
    return linear_handle(
        f"nlm-frozen[{kind},{symmetrization}]", weights, symmetric=weights.symmetric
    )


_FACTORIES = {
    "identity": lambda options: identity_denoiser(),
    "map_l1": lambda options: map_l1_denoiser(),
    "mmse": lambda options: mmse_denoiser(prior_from_config(options["prior"])),
    "map": lambda options: map_denoiser(prior_from_config(options["prior"])),
    "nlm": lambda options: nlm_denoiser(
        **{k: v for k, v in options.items() if k != "prior"}
    ),
}

_ALLOWED_OPTIONS = {
    "identity": set(),
    "map_l1": set(),
    "mmse": {"prior"},
    "map": {"prior"},
    "nlm": {"kernel", "patch_radius", "search_radius", "symmetrization"},
}


def registry_names() -> tuple[str, ...]:
    return tuple(sorted(_FACTORIES))


def make_denoiser(kind: str, **options) -> DenoiserHandle:
    """Instantiate a registered denoiser by name."""
    if kind not in _FACTORIES:
        raise ValueError(f"unknown denoiser {kind!r}; known: {registry_names()}")
    unknown = set(options) - _ALLOWED_OPTIONS[kind]
    if unknown:
        raise ValueError(f"unknown options for {kind!r}: {sorted(unknown)}")
    if kind in ("mmse", "map") and "prior" not in options:
        raise ValueError(f"denoiser {kind!r} requires a 'prior' option")
    return _FACTORIES[kind](options)
