"""Backend selection for the pairwise patch-distance kernels.

At import time the compiled Cython core is preferred when present;
otherwise the vectorized NumPy implementation is used.  Both expose the
same two functions and agree numerically (identical up to floating
summation order).  ``get_backend``/``available_backends`` let callers
and benchmarks pick one explicitly.
"""

from __future__ import annotations

from types import ModuleType

from . import numpy_impl

try:
    from . import _core as _compiled
except ImportError:
    _compiled = None

__all__ = ["available_backends", "default_backend_name", "get_backend"]

NORM_CODES = {"l2sq": 0, "l1": 1}


def available_backends() -> tuple[str, ...]:
    return ("compiled", "numpy") if _compiled is not None else ("numpy",)


def default_backend_name() -> str:
    return "compiled" if _compiled is not None else "numpy"


def get_backend(name: str | None = None) -> ModuleType:
    """Return the backend module for ``name`` (default: best available)."""
    if name is None or name == "auto":
        name = default_backend_name()
    if name == "numpy":
        return numpy_impl
    if name == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled backend requested but not built")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")
