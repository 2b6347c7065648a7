"""Denoiser-regularized inverse problems.

For measurements ``y = H u + noise``, the residual regularizer

    R(x) = (1/2) x^T (x - f(x, alpha))

has gradient ``x - f(x, alpha)`` whenever the denoiser has a symmetric
Jacobian and is locally homogeneous.  Stationarity of

    (1/2) ||H x - y||^2 + lambda R(x)

then gives the fixed-point iteration

    x_{k+1} = b + M f(x_k, alpha),
    b = (H^T H + lambda I)^{-1} H^T y,
    M = lambda (H^T H + lambda I)^{-1},

where every linear solve is a conjugate-gradient run on the positive
definite normal operator (the inverse is never formed).  With ``H = I``
the iteration collapses to the denoising bridge

    x_{k+1} = y / (1 + lambda) + lambda / (1 + lambda) * f(x_k, alpha).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .handles import DenoiserHandle
from .operators import ForwardOperator

__all__ = [
    "DivergenceError",
    "InverseProblem",
    "SolveResult",
    "cg_solve",
    "red_regularizer",
    "red_objective_gradient",
    "red_fixed_point",
    "bridge_iterate",
    "gibbs_energy_from_regularizer",
]

_DIVERGENCE_WINDOW = 10


class DivergenceError(RuntimeError):
    """Raised when an iterative solver moves away from a fixed point."""


@dataclass(frozen=True)
class InverseProblem:
    """Measurements plus the model that explains them.

    ``alpha`` is the noise level handed to the denoiser; ``lam`` weighs
    the regularizer against the data fit.
    """

    operator: ForwardOperator
    y: np.ndarray
    denoiser: DenoiserHandle | Callable
    alpha: float
    lam: float

    def __post_init__(self) -> None:
        y = np.asarray(self.y, dtype=np.float64).ravel()
        if y.size != self.operator.shape[0]:
            raise ValueError(
                f"y has {y.size} elements, operator produces {self.operator.shape[0]}"
            )
        if not np.all(np.isfinite(y)):
            raise ValueError("y must be finite")
        if not (self.alpha > 0 and np.isfinite(self.alpha)):
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not (self.lam > 0 and np.isfinite(self.lam)):
            raise ValueError(f"lambda must be positive, got {self.lam}")
        object.__setattr__(self, "y", y)


@dataclass(frozen=True)
class SolveResult:
    """Iterative solve outcome with convergence evidence."""

    estimate: np.ndarray
    iterations: int
    final_step: float
    converged: bool
    objective_trace: tuple[float, ...] = ()
    regularizer_trace: tuple[float, ...] = ()


def cg_solve(
    operator: Callable[[np.ndarray], np.ndarray],
    b: np.ndarray,
    rtol: float = 1e-10,
    max_iter: int | None = None,
) -> np.ndarray:
    """Conjugate gradients for SPD ``A x = b`` (matrix-free).

    Terminates when ``||r|| <= rtol * ||b||``.  Deterministic: fixed
    starting point (zero) and fixed arithmetic order.
    """
    b = np.asarray(b, dtype=np.float64).ravel()
    n = b.size
    if max_iter is None:
        max_iter = 4 * n
    x = np.zeros(n)
    r = b.copy()
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        return x
    p = r.copy()
    rs = float(np.dot(r, r))
    for _ in range(max_iter):
        if np.sqrt(rs) <= rtol * bnorm:
            return x
        ap = operator(p)
        denom = float(np.dot(p, ap))
        if denom <= 0:
            raise DivergenceError("CG operator is not positive definite")
        gamma = rs / denom
        x = x + gamma * p
        r = r - gamma * ap
        rs_new = float(np.dot(r, r))
        p = r + (rs_new / rs) * p
        rs = rs_new
    if np.sqrt(rs) <= rtol * bnorm:
        return x
    raise DivergenceError(f"CG did not reach rtol={rtol:g} in {max_iter} iterations")


def _eval_denoiser(f, x: np.ndarray, alpha: float) -> np.ndarray:
    out = np.asarray(f(x, alpha), dtype=np.float64)
    if not np.all(np.isfinite(out)):
        raise FloatingPointError("denoiser produced non-finite values")
    return out


def red_regularizer(x, f, alpha: float) -> float:
    """Residual energy ``(1/2) x^T (x - f(x, alpha))``."""
    arr = np.asarray(x, dtype=np.float64).ravel()
    fx = _eval_denoiser(f, arr, alpha).ravel()
    return 0.5 * float(np.dot(arr, arr - fx))


def red_objective_gradient(x, problem: InverseProblem) -> np.ndarray:
    """Gradient ``H^T (H x - y) + lambda (x - f(x, alpha))``.

    The residual form of the regularizer gradient is exact for
    denoisers with symmetric Jacobians and local homogeneity; for
    others it is the standard working approximation.
    """
    arr = np.asarray(x, dtype=np.float64).ravel()
    data_term = problem.operator.adjoint(problem.operator.apply(arr) - problem.y)
    fx = _eval_denoiser(problem.denoiser, arr, problem.alpha).ravel()
    return data_term + problem.lam * (arr - fx)


def _objective(problem: InverseProblem, x: np.ndarray, fx: np.ndarray) -> float:
    misfit = problem.operator.apply(x) - problem.y
    reg = 0.5 * float(np.dot(x, x - fx))
    return 0.5 * float(np.dot(misfit, misfit)) + problem.lam * reg


def _check_divergence(step_history: list[float]) -> None:
    recent = step_history[-(_DIVERGENCE_WINDOW + 1) :]
    if len(recent) == _DIVERGENCE_WINDOW + 1 and all(
        later > earlier for earlier, later in zip(recent[:-1], recent[1:])
    ):
        raise DivergenceError(
            f"update norm grew for {_DIVERGENCE_WINDOW} consecutive iterations"
        )


def red_fixed_point(
    problem: InverseProblem,
    x0=None,
    tol: float = 1e-10,
    max_iter: int = 2000,
    cg_rtol: float = 1e-10,
) -> SolveResult:
    """Fixed-point iteration for the residual-regularized objective.

    Stops when the max-norm update drops to ``tol``; raises
    :class:`DivergenceError` if the update norm grows for 10 straight
    iterations or a linear solve fails.
    """
    op = problem.operator
    lam = problem.lam
    n = op.shape[1]

    def normal_op(v: np.ndarray) -> np.ndarray:
        return op.gram(v) + lam * v

    b = cg_solve(normal_op, op.adjoint(problem.y), rtol=cg_rtol)
    x = np.zeros(n) if x0 is None else np.asarray(x0, dtype=np.float64).ravel().copy()
    if x.size != n:
        raise ValueError(f"x0 must have {n} elements")
    steps: list[float] = []
    objectives: list[float] = []
    regularizers: list[float] = []
    for k in range(1, max_iter + 1):
        fx = _eval_denoiser(problem.denoiser, x, problem.alpha).ravel()
        objectives.append(_objective(problem, x, fx))
        regularizers.append(0.5 * float(np.dot(x, x - fx)))
        x_next = b + cg_solve(normal_op, lam * fx, rtol=cg_rtol)
        step = float(np.max(np.abs(x_next - x)))
        steps.append(step)
        x = x_next
        if step <= tol:
            return SolveResult(
                estimate=x,
                iterations=k,
                final_step=step,
                converged=True,
                objective_trace=tuple(objectives),
                regularizer_trace=tuple(regularizers),
            )
        _check_divergence(steps)
    return SolveResult(
        estimate=x,
        iterations=max_iter,
        final_step=steps[-1],
        converged=False,
        objective_trace=tuple(objectives),
        regularizer_trace=tuple(regularizers),
    )


def bridge_iterate(
    y,
    f,
    alpha: float,
    lam: float,
    x0=None,
    tol: float = 1e-10,
    max_iter: int = 2000,
) -> SolveResult:
    """Identity-operator fixed point: blend of ``y`` and ``f(x_k)``.

    ``x_{k+1} = y / (1 + lam) + lam / (1 + lam) * f(x_k, alpha)``; same
    stopping and divergence rules as :func:`red_fixed_point`.
    """
    y = np.asarray(y, dtype=np.float64).ravel()
    if not (lam > 0 and np.isfinite(lam)):
        raise ValueError(f"lambda must be positive, got {lam}")
    base = y / (1.0 + lam)
    gain = lam / (1.0 + lam)
    x = base.copy() if x0 is None else np.asarray(x0, dtype=np.float64).ravel().copy()
    steps: list[float] = []
    objectives: list[float] = []
    regularizers: list[float] = []
    for k in range(1, max_iter + 1):
        fx = _eval_denoiser(f, x, alpha).ravel()
        misfit = x - y
        reg = 0.5 * float(np.dot(x, x - fx))
        objectives.append(0.5 * float(np.dot(misfit, misfit)) + lam * reg)
        regularizers.append(reg)
        x_next = base + gain * fx
        step = float(np.max(np.abs(x_next - x)))
        steps.append(step)
        x = x_next
        if step <= tol:
            return SolveResult(
                estimate=x,
                iterations=k,
                final_step=step,
                converged=True,
                objective_trace=tuple(objectives),
                regularizer_trace=tuple(regularizers),
            )
        _check_divergence(steps)
    return SolveResult(
        estimate=x,
        iterations=max_iter,
        final_step=steps[-1],
        converged=False,
        objective_trace=tuple(objectives),
        regularizer_trace=tuple(regularizers),
    )


def gibbs_energy_from_regularizer(x, f, alpha: float, eps: float = 1e-6) -> dict:
    """Two candidate energies induced by a denoiser.

    Returns the residual form ``(1/2) x^T (x - f(x))`` and the
    Jacobian form ``(1/2) x^T (x - J_f(x) x)`` with ``J_f(x) x``
    obtained from a scaling derivative.  The two agree when the
    denoiser is locally homogeneous; both are reported rather than
    silently preferring one.
    """
    arr = np.asarray(x, dtype=np.float64).ravel()
    fx = _eval_denoiser(f, arr, alpha).ravel()
    f_plus = _eval_denoiser(f, (1.0 + eps) * arr, alpha).ravel()
    f_minus = _eval_denoiser(f, (1.0 - eps) * arr, alpha).ravel()
    jx = (f_plus - f_minus) / (2.0 * eps)
    residual_form = 0.5 * float(np.dot(arr, arr - fx))
    jacobian_form = 0.5 * float(np.dot(arr, arr - jx))
    return {
        "residual_form": residual_form,
        "jacobian_form": jacobian_form,
        "gap": residual_form - jacobian_form,
    }
