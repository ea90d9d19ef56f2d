import numpy as np
import pytest

from hyperfem.fem import (LinearSolveError, SparseMatrixCSR, apply_dirichlet,
                          linear_solve)


def _from_dense(A):
    n = len(A)
    indptr = [0]
    indices, data = [], []
    for i in range(n):
        for j in range(n):
            if A[i, j] != 0.0 or i == j:  # keep diagonal in pattern
                indices.append(j)
                data.append(A[i, j])
        indptr.append(len(indices))
    return SparseMatrixCSR(n, indptr, indices, data)


def _random_spd(n, rng):
    B = rng.standard_normal((n, n))
    A = B @ B.T + n * np.eye(n)
    # sparsify while keeping SPD-ish structure: zero far off-diagonals
    mask = np.abs(np.subtract.outer(np.arange(n), np.arange(n))) <= 6
    A = np.where(mask, A, 0.0)
    return (A + A.T) / 2


class TestCSR:
    def test_matvec_matches_dense(self):
        rng = np.random.default_rng(0)
        A = _random_spd(20, rng)
        K = _from_dense(A)
        x = rng.standard_normal(20)
        assert np.allclose(K.matvec(x), A @ x, atol=1e-12)

    def test_symmetry_measure(self):
        A = np.array([[2.0, 1.0], [1.0, 3.0]])
        assert _from_dense(A).max_abs_asymmetry() == 0.0
        A[0, 1] = 1.5
        assert _from_dense(A).max_abs_asymmetry() == pytest.approx(0.5)


class TestLinearSolve:
    def test_identity(self):
        K = _from_dense(np.eye(5))
        b = np.arange(5.0)
        assert np.array_equal(linear_solve(K, b), b)

    def test_random_spd_vs_dense_oracle(self):
        rng = np.random.default_rng(1)
        A = _random_spd(50, rng)
        b = rng.standard_normal(50)
        x_ref = np.linalg.solve(A, b)
        x = linear_solve(_from_dense(A), b)
        assert np.abs(x - x_ref).max() / np.abs(x_ref).max() < 1e-12

    def test_singular_matrix_raises(self):
        A = np.zeros((4, 4))
        A[0, 0] = 1.0  # rank-deficient: rigid modes remain
        with pytest.raises(LinearSolveError, match="linear solve failed"):
            linear_solve(_from_dense(A), np.ones(4))

    def test_zero_rhs(self):
        K = _from_dense(np.eye(3) * 4)
        assert np.array_equal(linear_solve(K, np.zeros(3)), np.zeros(3))


class TestApplyDirichlet:
    def test_fully_constrained_gives_identity(self):
        rng = np.random.default_rng(3)
        A = _random_spd(6, rng)
        K = _from_dense(A)
        R = rng.standard_normal(6)
        K2, R2 = apply_dirichlet(K, R, np.arange(6), np.zeros(6))
        assert np.allclose(K2.toarray(), np.eye(6))
        assert np.array_equal(R2, np.zeros(6))
        assert np.array_equal(linear_solve(K2, R2 + 0.0) if R2.any() else np.zeros(6),
                              np.zeros(6))

    def test_elimination_semantics(self):
        rng = np.random.default_rng(4)
        A = _random_spd(8, rng)
        K = _from_dense(A)
        R = rng.standard_normal(8)
        d, val = 3, 0.7
        K2, R2 = apply_dirichlet(K, R, [d], [val])
        free = [i for i in range(8) if i != d]
        # free block untouched
        assert np.allclose(K2.toarray()[np.ix_(free, free)], A[np.ix_(free, free)])
        # coupling moved to the RHS
        assert np.allclose(R2[free], R[free] - A[free, d] * val)
        assert R2[d] == val
        # symmetry preserved
        assert K2.max_abs_asymmetry() == 0.0
        # solving enforces the value exactly
        x = linear_solve(K2, R2)
        assert x[d] == val

    def test_inputs_not_mutated(self):
        rng = np.random.default_rng(5)
        A = _random_spd(5, rng)
        K = _from_dense(A)
        R = rng.standard_normal(5)
        data_before = K.data.copy()
        apply_dirichlet(K, R, [1], [2.0])
        assert np.array_equal(K.data, data_before)

    def test_out_of_range_dof(self):
        K = _from_dense(np.eye(3))
        with pytest.raises(IndexError):
            apply_dirichlet(K, np.zeros(3), [7], [0.0])
