"""Row normalization and the two symmetrization routes."""

import numpy as np
import pytest
import scipy.sparse as sp
from numpy.testing import assert_allclose, assert_array_equal

from denoisekit.kernels import build_kernel_matrix
from denoisekit.patches import PatchConfig
from denoisekit.rng import make_rng, standard_normal
from denoisekit.weights import (
    WeightMatrix,
    apply_pseudo_linear,
    normalize_rows,
    sinkhorn_symmetrize,
    taylor_symmetrize,
)


def _random_kernel(seed: int, n: int = 24, sparse: bool = False):
    x = standard_normal(make_rng(seed), (n,))
    cfg = PatchConfig(1, search_radius=4) if sparse else PatchConfig(1)
    return build_kernel_matrix(x, cfg, "gaussian", 1.5)


class TestNormalizeRows:
    def test_row_sums_one_and_nonnegative(self):
        km = _random_kernel(0)
        weights, row_sums = normalize_rows(km)
        assert weights.stochasticity == "row"
        assert_allclose(weights.row_sums(), 1.0, atol=1e-14)
        assert np.all(weights.matrix >= 0)
        assert_allclose(row_sums, km.toarray().sum(axis=1), rtol=1e-15)

    def test_generally_not_symmetric(self):
        weights, _ = normalize_rows(_random_kernel(1))
        w = weights.matrix
        assert np.max(np.abs(w - w.T)) > 1e-6

    def test_rejects_nonpositive_row_sum(self):
        bad = sp.csr_matrix(np.array([[0.0, 0.0], [0.0, 1.0]]))
        km = _random_kernel(2)
        with pytest.raises(ValueError):
            normalize_rows(type(km)(matrix=bad, alpha=km.alpha, kind=km.kind))


class TestSinkhorn:
    def test_two_by_two_closed_form(self):
        w, iterations = sinkhorn_symmetrize(np.array([[2.0, 1.0], [1.0, 2.0]]))
        expected = np.array([[2.0, 1.0], [1.0, 2.0]]) / 3.0
        assert_allclose(w.matrix, expected, atol=1e-10)
        assert iterations >= 1

    @pytest.mark.parametrize("seed", [3, 4, 5])
    def test_doubly_stochastic_and_exactly_symmetric(self, seed):
        w, _ = sinkhorn_symmetrize(_random_kernel(seed), tol=1e-12)
        mat = w.matrix
        assert_array_equal(mat, mat.T)
        assert_allclose(mat.sum(axis=1), 1.0, atol=1e-10)
        assert_allclose(mat.sum(axis=0), 1.0, atol=1e-10)
        assert np.all(mat >= 0)
        assert w.stochasticity == "doubly"
        assert w.symmetric

    def test_sparse_input_stays_sparse(self):
        w, _ = sinkhorn_symmetrize(_random_kernel(6, sparse=True), tol=1e-12)
        assert sp.issparse(w.matrix)
        dense = w.matrix.toarray()
        assert_array_equal(dense, dense.T)
        assert_allclose(dense.sum(axis=1), 1.0, atol=1e-10)

    def test_preserves_constants(self):
        w, _ = sinkhorn_symmetrize(_random_kernel(7), tol=1e-12)
        ones = np.ones(w.matrix.shape[0])
        assert_allclose(w.dot(ones), ones, atol=1e-9)

    def test_iteration_budget_enforced(self):
        with pytest.raises(ValueError):
            sinkhorn_symmetrize(_random_kernel(8), tol=1e-12, max_iter=1)


class TestTaylor:
    @pytest.mark.parametrize("seed", list(range(9, 29)))
    def test_symmetric_with_unit_row_sums(self, seed):
        w = taylor_symmetrize(_random_kernel(seed))
        mat = w.matrix
        assert_array_equal(mat, mat.T)
        # row sums cancel exactly by construction, up to rounding
        assert_allclose(mat.sum(axis=1), 1.0, atol=1e-12)
        assert w.stochasticity == "row"
        assert w.symmetric

    def test_sparse_route_matches_dense(self):
        km_sparse = _random_kernel(30, sparse=True)
        km_dense = type(km_sparse)(
            matrix=km_sparse.toarray(), alpha=km_sparse.alpha, kind=km_sparse.kind
        )
        a = taylor_symmetrize(km_sparse).matrix.toarray()
        b = taylor_symmetrize(km_dense).matrix
        assert_allclose(a, b, atol=1e-14)

    def test_entries_may_go_negative(self):
        # the first-order correction trades positivity for symmetry: a
        # row sum exceeding the mean by more than one drives that
        # diagonal entry below zero
        mat = np.eye(4)
        mat[0, :] = 1.0
        mat[:, 0] = 1.0
        km = _random_kernel(34)
        heavy = type(km)(matrix=mat, alpha=km.alpha, kind=km.kind)
        w = taylor_symmetrize(heavy)
        assert w.matrix[0, 0] < 0
        assert_allclose(w.matrix.sum(axis=1), 1.0, atol=1e-12)


class TestWeightMatrix:
    def test_validate_passes_for_sinkhorn_output(self):
        w, _ = sinkhorn_symmetrize(_random_kernel(31), tol=1e-12)
        w.validate()

    def test_validate_rejects_bad_row_sums(self):
        w = WeightMatrix(matrix=np.eye(3) * 2.0, stochasticity="row", symmetric=True)
        with pytest.raises(ValueError):
            w.validate()

    def test_validate_rejects_asymmetry_claim(self):
        mat = np.array([[0.4, 0.6], [0.2, 0.8]])
        w = WeightMatrix(matrix=mat, stochasticity="row", symmetric=True)
        with pytest.raises(ValueError):
            w.validate()

    def test_apply_pseudo_linear_keeps_shape(self):
        x = standard_normal(make_rng(32), (5, 5))
        km = build_kernel_matrix(x, PatchConfig(1, search_radius=2), "gaussian", 1.0)
        w, _ = normalize_rows(km)
        out = apply_pseudo_linear(w, x)
        assert out.shape == x.shape
        assert_allclose(out.ravel(), w.dot(x.ravel()), rtol=1e-15)

    def test_doubly_stochastic_application_preserves_mean(self):
        x = standard_normal(make_rng(33), (36,))
        km = build_kernel_matrix(x, PatchConfig(1), "gaussian", 2.0)
        w, _ = sinkhorn_symmetrize(km, tol=1e-12)
        assert np.mean(apply_pseudo_linear(w, x)) == pytest.approx(
            np.mean(x), abs=1e-10
        )
