"""Numerical checks for ideal-denoiser properties.

An ideal denoiser leaves inputs untouched at zero noise, has a
symmetric Jacobian (equivalently: is a conservative vector field, the
gradient of some scalar energy), and is typically nonexpansive.  This
module measures those properties by finite differences and quadrature
and reports the results without hiding the measured magnitudes.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .handles import DenoiserHandle
from .rng import make_rng, standard_normal

__all__ = [
    "PropertyReport",
    "jacobian_fd",
    "check_identity",
    "check_symmetry",
    "check_conservative",
    "estimate_lipschitz",
    "check_homogeneity",
    "affine_combine",
    "nudge_away_from_kinks",
    "run_standard_checks",
]

_MAX_JACOBIAN_DIM = 4096


@dataclass(frozen=True)
class PropertyReport:
    """Outcome of one property check.

    ``measured`` is the worst observed violation (or the measured
    quantity for report-only checks such as the Lipschitz estimate);
    ``passed`` compares it against ``tolerance`` where applicable.
    """

    name: str
    passed: bool
    measured: float
    tolerance: float
    n_points: int
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def _call(f, x: np.ndarray, alpha: float) -> np.ndarray:
    if isinstance(f, DenoiserHandle):
        return f.evaluate(x, alpha)
    return np.asarray(f(x, alpha), dtype=np.float64)


def jacobian_fd(f, x, alpha: float, h: float = 1e-6) -> np.ndarray:
    """Dense Jacobian of ``f(., alpha)`` at ``x`` by central differences.

    Column ``k`` is ``(f(x + h e_k) - f(x - h e_k)) / (2 h)`` on the
    flattened signal.  Guarded to 4096 elements; beyond that the dense
    matrix is no longer a sensible object to materialize.
    """
    arr = np.asarray(x, dtype=np.float64)
    n = arr.size
    if n > _MAX_JACOBIAN_DIM:
        raise ValueError(f"jacobian_fd limited to {_MAX_JACOBIAN_DIM} elements, got {n}")
    jac = np.empty((n, n), dtype=np.float64)
    flat = arr.ravel()
    for k in range(n):
        step = np.zeros(n)
        step[k] = h
        fp = _call(f, (flat + step).reshape(arr.shape), alpha).ravel()
        fm = _call(f, (flat - step).reshape(arr.shape), alpha).ravel()
        jac[:, k] = (fp - fm) / (2.0 * h)
    return jac


def nudge_away_from_kinks(x, kinks: Sequence[float], margin: float) -> np.ndarray:
    """Push entries of ``x`` at least ``margin`` away from each kink.

    Finite differences straddling a nondifferentiable point measure
    nothing useful; test points are moved to the nearest safe side.
    """
    out = np.asarray(x, dtype=np.float64).copy()
    for kink in kinks:
        d = out - kink
        close = np.abs(d) < margin
        out[close] = kink + np.where(d[close] >= 0, margin, -margin)
    return out


def check_identity(f, test_points: Iterable, tol: float = 1e-9, alpha: float = 0.0) -> PropertyReport:
    """Max-norm deviation of ``f(x, alpha)`` from ``x`` over test points.

    ``alpha`` defaults to 0; denoisers that reject a zero level are
    probed at a caller-supplied small alpha instead.
    """
    worst = 0.0
    count = 0
    for point in test_points:
        arr = np.asarray(point, dtype=np.float64)
        dev = float(np.max(np.abs(_call(f, arr, alpha) - arr)))
        worst = max(worst, dev)
        count += 1
    if count == 0:
        raise ValueError("check_identity needs at least one test point")
    return PropertyReport("identity", worst <= tol, worst, tol, count)


def _asymmetry(jac: np.ndarray) -> float:
    scale = max(1.0, float(np.max(np.abs(jac))))
    return float(np.max(np.abs(jac - jac.T))) / scale


def check_symmetry(
    f, test_points: Iterable, alpha: float, tol: float = 1e-6, h: float = 1e-6
) -> PropertyReport:
    """Relative Jacobian asymmetry ``|J - J^T| / max(1, |J|)`` (max norm).

    For input-adaptive smoothers this measures the Jacobian of the full
    map, weights included.  When the probed object can also freeze its
    weights (``jacobian_matrix`` metadata on a handle named the same
    way), the frozen operator is a separate check; see
    ``run_standard_checks``.
    """
    worst = 0.0
    count = 0
    for point in test_points:
        jac = jacobian_fd(f, np.asarray(point, dtype=np.float64), alpha, h=h)
        worst = max(worst, _asymmetry(jac))
        count += 1
    if count == 0:
        raise ValueError("check_symmetry needs at least one test point")
    return PropertyReport("jacobian_symmetry", worst <= tol, worst, tol, count)


def check_conservative(
    f,
    loop: Sequence,
    alpha: float,
    n_segments: int = 8,
    tol: float = 1e-6,
) -> PropertyReport:
    """Midpoint-rule circulation of ``f`` around a closed polyline.

    A conservative field integrates to zero around any closed loop.
    ``loop`` is a sequence of vertices; the closing edge back to the
    first vertex is implicit.  Pass iff ``|circulation| <= tol * length``.
    """
    vertices = [np.asarray(v, dtype=np.float64) for v in loop]
    if len(vertices) < 3:
        raise ValueError("loop needs at least 3 vertices")
    if n_segments < 1:
        raise ValueError("n_segments must be >= 1")
    total = 0.0
    length = 0.0
    closed = vertices + [vertices[0]]
    for a, b in zip(closed[:-1], closed[1:]):
        edge = b - a
        length += float(np.linalg.norm(edge.ravel()))
        piece = edge / n_segments
        for s in range(n_segments):
            mid = a + (s + 0.5) * piece
            val = _call(f, mid, alpha)
            total += float(np.dot(val.ravel(), piece.ravel()))
    measured = abs(total)
    tolerance = tol * max(length, 1e-300)
    report = PropertyReport(
        "conservative_loop",
        measured <= tolerance,
        measured,
        tolerance,
        len(vertices),
        details={"loop_length": length, "circulation": total},
    )
    return report


def estimate_lipschitz(
    f,
    alpha: float,
    pairs: int | Sequence = 100,
    dim: int = 16,
    seed: int = 0,
    scale: float = 1.0,
) -> PropertyReport:
    """Empirical Lipschitz lower bound over sampled (or given) pairs.

    ``pairs`` is either an iterable of ``(x, y)`` tuples or a count of
    Gaussian pairs to draw.  Coincident pairs are skipped.  The result
    is report-only: ``passed`` is always True and ``measured`` is the
    largest observed ratio, a lower bound on the true constant.
    """
    if isinstance(pairs, int):
        if pairs < 1:
            raise ValueError("need at least one pair")
        rng = make_rng(seed)
        sampled = [
            (
                scale * standard_normal(rng, (dim,)),
                scale * standard_normal(rng, (dim,)),
            )
            for _ in range(pairs)
        ]
    else:
        sampled = [(np.asarray(a, float), np.asarray(b, float)) for a, b in pairs]
        if not sampled:
            raise ValueError("need at least one pair")
    worst = 0.0
    used = 0
    for a, b in sampled:
        gap = float(np.linalg.norm((a - b).ravel()))
        if gap == 0.0:
            continue
        out_gap = float(
            np.linalg.norm((_call(f, a, alpha) - _call(f, b, alpha)).ravel())
        )
        worst = max(worst, out_gap / gap)
        used += 1
    if used == 0:
        raise ValueError("all pairs were coincident")
    return PropertyReport(
        "lipschitz_lower_bound",
        True,
        worst,
        float("nan"),
        used,
        details={"interpretation": "lower bound on the Lipschitz constant"},
    )


def check_homogeneity(
    f, test_points: Iterable, alpha: float, eps: float = 1e-6, tol: float = 1e-6
) -> PropertyReport:
    """Local homogeneity: does scaling the input scale the output?

    Measures ``|(f((1+eps) x) - f(x)) / eps - f(x)| / |f(x)|`` (vector
    norms) at each point; exact for maps with ``J(x) x = f(x)``.
    """
    worst = 0.0
    count = 0
    for point in test_points:
        arr = np.asarray(point, dtype=np.float64)
        fx = _call(f, arr, alpha)
        directional = (_call(f, (1.0 + eps) * arr, alpha) - fx) / eps
        denom = max(float(np.linalg.norm(fx.ravel())), 1e-300)
        worst = max(worst, float(np.linalg.norm((directional - fx).ravel())) / denom)
        count += 1
    if count == 0:
        raise ValueError("check_homogeneity needs at least one test point")
    return PropertyReport("local_homogeneity", worst <= tol, worst, tol, count)


def affine_combine(
    handles: Sequence[DenoiserHandle],
    coefficients: Sequence[float],
    alphas: Sequence[float] | None = None,
) -> DenoiserHandle:
    """Affine combination of denoisers.

    Coefficients may have any signs but must sum to 1 within 1e-12
    (``ValueError`` otherwise), so the combination preserves the
    identity-at-zero property.  With ``alphas`` given, handle ``k`` is
    evaluated at its own pinned level instead of the call-time alpha.
    """
    coeff = np.asarray(coefficients, dtype=np.float64)
    if len(handles) != coeff.size or coeff.size == 0:
        raise ValueError("handles and coefficients must have equal nonzero length")
    total = float(coeff.sum())
    if abs(total - 1.0) > 1e-12:
        raise ValueError(f"coefficients must sum to 1 within 1e-12, got {total!r}")
    if alphas is not None and len(alphas) != len(handles):
        raise ValueError("alphas must match handles in length")
    dims = {h.dim for h in handles if h.dim is not None}
    if len(dims) > 1:
        raise ValueError(f"handles disagree on dimension: {sorted(dims)}")

    def fn(x: np.ndarray, alpha: float) -> np.ndarray:
        out = np.zeros_like(x, dtype=np.float64)
        for k, handle in enumerate(handles):
            level = alpha if alphas is None else float(alphas[k])
            out += coeff[k] * handle.evaluate(x, level)
        return out

    return DenoiserHandle(
        name="affine[" + ",".join(h.name for h in handles) + "]",
        fn=fn,
        dim=(dims.pop() if dims else None),
        separable=all(h.separable for h in handles),
    )


def run_standard_checks(
    handle: DenoiserHandle,
    alpha: float,
    dim: int = 16,
    seed: int = 0,
    identity_alpha: float = 0.0,
    identity_tol: float = 1e-9,
    symmetry_tol: float = 1e-6,
    conservative_tol: float = 1e-4,
    homogeneity_tol: float = 1e-6,
) -> list[PropertyReport]:
    """Run the full property battery on one denoiser.

    Returns identity, Jacobian-symmetry, conservative-loop,
    local-homogeneity, and Lipschitz reports, in that order.  The
    homogeneity and Lipschitz entries are measurements; their ``passed``
    flag is advisory for nonlinear maps.
    """
    rng = make_rng(seed)
    points = [standard_normal(rng, (dim,)) for _ in range(3)]
    loop = [standard_normal(rng, (dim,)) for _ in range(4)]
    reports = [
        check_identity(handle, points, tol=identity_tol, alpha=identity_alpha),
        check_symmetry(handle, points, alpha, tol=symmetry_tol),
        check_conservative(handle, loop, alpha, n_segments=128, tol=conservative_tol),
        check_homogeneity(handle, points, alpha, tol=homogeneity_tol),
        estimate_lipschitz(handle, alpha, pairs=64, dim=dim, seed=seed + 1),
    ]
    return reports
