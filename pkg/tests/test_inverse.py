"""Conjugate gradients, the residual-regularized fixed point, and the
denoising bridge."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from denoisekit.denoisers import make_denoiser
from denoisekit.handles import linear_handle
from denoisekit.inverse import (
    DivergenceError,
    InverseProblem,
    bridge_iterate,
    cg_solve,
    gibbs_energy_from_regularizer,
    red_fixed_point,
    red_objective_gradient,
    red_regularizer,
)
from denoisekit.nlm import nlm_weights
from denoisekit.operators import (
    CircularConvolutionOperator,
    IdentityOperator,
    MatrixOperator,
)
from denoisekit.patches import PatchConfig
from denoisekit.rng import make_rng, standard_normal

from oracles import dense_bridge_solution, dense_red_solution, fd_derivative


def _spd_system(seed: int, n: int):
    a = standard_normal(make_rng(seed), (n, n))
    mat = a @ a.T + n * np.eye(n)
    b = standard_normal(make_rng(seed + 1), (n,))
    return mat, b


def _frozen_smoother(seed: int, n: int):
    """Symmetric doubly stochastic weights frozen from a reference signal."""
    ref = standard_normal(make_rng(seed), (n,))
    w = nlm_weights(
        ref,
        0.8,
        cfg=PatchConfig(patch_radius=1, search_radius=4),
        symmetrization="sinkhorn",
    )
    return linear_handle("frozen_smoother", w, symmetric=True), w.toarray()


class TestConjugateGradients:
    def test_matches_dense_solve(self):
        mat, b = _spd_system(0, 12)
        x = cg_solve(lambda v: mat @ v, b, rtol=1e-12)
        assert_allclose(x, np.linalg.solve(mat, b), rtol=1e-9, atol=1e-12)

    def test_zero_rhs_returns_zero(self):
        mat, _ = _spd_system(1, 6)
        assert np.all(cg_solve(lambda v: mat @ v, np.zeros(6)) == 0.0)

    def test_indefinite_operator_raises(self):
        mat = np.diag([1.0, -1.0])
        with pytest.raises(DivergenceError):
            cg_solve(lambda v: mat @ v, np.array([1.0, 1.0]))

    def test_iteration_budget_enforced(self):
        mat, b = _spd_system(2, 30)
        with pytest.raises(DivergenceError):
            cg_solve(lambda v: mat @ v, b, rtol=1e-14, max_iter=2)


class TestProblemValidation:
    def test_rejects_inconsistent_sizes_and_weights(self):
        f = make_denoiser("identity")
        with pytest.raises(ValueError):
            InverseProblem(IdentityOperator(4), np.zeros(5), f, 1.0, 1.0)
        with pytest.raises(ValueError):
            InverseProblem(IdentityOperator(4), [0.0, np.nan, 0.0, 0.0], f, 1.0, 1.0)
        with pytest.raises(ValueError):
            InverseProblem(IdentityOperator(4), np.zeros(4), f, 0.0, 1.0)
        with pytest.raises(ValueError):
            InverseProblem(IdentityOperator(4), np.zeros(4), f, 1.0, -2.0)


class TestRegularizer:
    def test_residual_energy_for_linear_weights(self):
        f, w = _frozen_smoother(3, 24)
        x = standard_normal(make_rng(4), (24,))
        expected = 0.5 * float(x @ (np.eye(24) - w) @ x)
        assert red_regularizer(x, f, 0.8) == pytest.approx(expected, rel=1e-12)

    def test_gradient_matches_objective_finite_differences(self):
        f, w = _frozen_smoother(5, 16)
        op = CircularConvolutionOperator(16, [0.25, 0.5, 0.25])
        y = standard_normal(make_rng(6), (16,))
        problem = InverseProblem(op, y, f, 0.8, 0.7)
        x = standard_normal(make_rng(7), (16,))
        grad = red_objective_gradient(x, problem)

        def objective(v):
            misfit = op.apply(v) - y
            return 0.5 * float(misfit @ misfit) + 0.7 * red_regularizer(v, f, 0.8)

        for i in [0, 5, 15]:
            def along(t, i=i):
                v = x.copy()
                v[i] += t
                return objective(v)

            assert grad[i] == pytest.approx(fd_derivative(along, 0.0, 1e-6), abs=1e-5)


class TestRedFixedPoint:
    def test_limit_solves_the_dense_normal_equations(self):
        n = 48
        f, w = _frozen_smoother(8, n)
        op = CircularConvolutionOperator(n, [0.15, 0.7, 0.15])
        truth = np.cumsum(standard_normal(make_rng(9), (n,))) / 4.0
        y = op.apply(truth)
        problem = InverseProblem(op, y, f, 0.8, 0.5)
        result = red_fixed_point(problem, tol=1e-12)
        assert result.converged
        expected = dense_red_solution(op.dense(), w, 0.5, y)
        assert_allclose(result.estimate, expected, atol=1e-9)

    def test_identity_operator_agrees_with_bridge(self):
        n = 20
        f, _ = _frozen_smoother(10, n)
        y = standard_normal(make_rng(11), (n,))
        problem = InverseProblem(IdentityOperator(n), y, f, 0.8, 0.9)
        via_red = red_fixed_point(problem, tol=1e-13)
        via_bridge = bridge_iterate(y, f, 0.8, 0.9, tol=1e-13)
        assert_allclose(via_red.estimate, via_bridge.estimate, atol=1e-10)

    def test_objective_trace_decreases(self):
        n = 16
        f, _ = _frozen_smoother(12, n)
        op = MatrixOperator(np.eye(n) * 0.5)
        y = standard_normal(make_rng(13), (n,))
        problem = InverseProblem(op, y, f, 0.8, 0.4)
        result = red_fixed_point(problem, tol=1e-12)
        trace = np.asarray(result.objective_trace)
        assert trace[-1] <= trace[0]
        assert np.all(np.diff(trace) <= 1e-10)

    def test_x0_size_checked(self):
        f = make_denoiser("identity")
        problem = InverseProblem(IdentityOperator(4), np.zeros(4), f, 1.0, 1.0)
        with pytest.raises(ValueError):
            red_fixed_point(problem, x0=np.zeros(5))

    def test_unconverged_is_reported(self):
        n = 12
        f, _ = _frozen_smoother(14, n)
        y = standard_normal(make_rng(15), (n,))
        problem = InverseProblem(IdentityOperator(n), y, f, 0.8, 5.0)
        result = red_fixed_point(problem, tol=1e-15, max_iter=3)
        assert not result.converged
        assert result.iterations == 3


class TestBridge:
    def test_limit_matches_closed_form(self):
        n = 32
        f, w = _frozen_smoother(16, n)
        y = standard_normal(make_rng(17), (n,))
        result = bridge_iterate(y, f, 0.8, 1.3, tol=1e-13)
        assert result.converged
        assert_allclose(result.estimate, dense_bridge_solution(w, 1.3, y), atol=1e-10)

    def test_identity_denoiser_returns_y(self):
        y = standard_normal(make_rng(18), (10,))
        result = bridge_iterate(y, make_denoiser("identity"), 1.0, 2.0, tol=1e-13)
        assert_allclose(result.estimate, y, atol=1e-11)

    def test_expansive_map_raises_divergence(self):
        def blowup(x, alpha):
            return 3.0 * x

        y = np.ones(6)
        with pytest.raises(DivergenceError):
            bridge_iterate(y, blowup, 1.0, 4.0, max_iter=500)

    def test_lambda_validated(self):
        with pytest.raises(ValueError):
            bridge_iterate(np.ones(3), make_denoiser("identity"), 1.0, 0.0)


class TestGibbsEnergy:
    def test_forms_agree_for_linear_weights(self):
        f, _ = _frozen_smoother(19, 20)
        x = standard_normal(make_rng(20), (20,))
        out = gibbs_energy_from_regularizer(x, f, 0.8)
        assert out["gap"] == pytest.approx(0.0, abs=1e-6)
        assert out["residual_form"] == pytest.approx(out["jacobian_form"], abs=1e-6)

    def test_forms_disagree_for_soft_thresholding(self):
        f = make_denoiser("map_l1")
        x = np.array([3.0, -2.5, 4.0, 5.0])
        out = gibbs_energy_from_regularizer(x, f, 1.0)
        # away from the dead zone the scaling derivative returns x itself,
        # so the Jacobian form vanishes while the residual form does not
        assert abs(out["gap"]) > 1.0
