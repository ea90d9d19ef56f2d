"""Compressed sparse row matrices, Dirichlet elimination, direct solve.

The factorization is delegated to SuperLU via scipy: a symmetric-mode,
pivot-free ordering first (Cholesky-like, valid for the SPD systems the
solver produces), with a partial-pivoting LU fallback.  Solutions are
always residual-checked.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

__all__ = ["SparseMatrixCSR", "LinearSolveError", "linear_solve", "apply_dirichlet"]


class LinearSolveError(RuntimeError):
    pass


class SparseMatrixCSR:
    """Symmetric-pattern CSR with sorted column indices per row."""

    __slots__ = ("n", "indptr", "indices", "data")

    def __init__(self, n, indptr, indices, data):
        self.n = int(n)
        self.indptr = np.asarray(indptr, dtype=np.int64)
        self.indices = np.asarray(indices, dtype=np.int64)
        self.data = np.asarray(data, dtype=np.float64)

    @property
    def nnz(self):
        return len(self.indices)

    def copy(self):
        return SparseMatrixCSR(self.n, self.indptr, self.indices, self.data.copy())

    def row_of_entry(self):
        return np.repeat(np.arange(self.n), np.diff(self.indptr))

    def matvec(self, x):
        out = np.zeros(self.n)
        rows = self.row_of_entry()
        np.add.at(out, rows, self.data * x[self.indices])
        return out

    def to_scipy(self):
        return sp.csr_matrix((self.data, self.indices, self.indptr),
                             shape=(self.n, self.n))

    def toarray(self):
        return self.to_scipy().toarray()

    def max_abs_asymmetry(self):
        """max |K - K^T| (0 for exactly symmetric values)."""
        a = self.to_scipy()
        return abs(a - a.T).max() if self.nnz else 0.0

    def diagonal_positions(self):
        rows = self.row_of_entry()
        hit = self.indices == rows
        pos = np.full(self.n, -1, dtype=np.int64)
        pos[rows[hit]] = np.nonzero(hit)[0]
        if (pos < 0).any():
            r = int(np.nonzero(pos < 0)[0][0])
            raise LinearSolveError(f"missing diagonal entry in row {r}")
        return pos


def apply_dirichlet(K: SparseMatrixCSR, R: np.ndarray, dofs, values):
    """Symmetric elimination of constrained DOFs.

    Rows and columns of the constrained DOFs are zeroed, their diagonals
    set to one and the right-hand side adjusted so the solution takes the
    prescribed increment exactly.  Returns new (K', R'); inputs untouched.
    """
    dofs = np.asarray(dofs, dtype=np.int64)
    values = np.asarray(values, dtype=np.float64)
    if len(dofs) != len(values):
        raise ValueError("dofs and values length mismatch")
    K2 = K.copy()
    R2 = np.array(R, dtype=np.float64, copy=True)
    if len(dofs) == 0:
        return K2, R2
    if dofs.min() < 0 or dofs.max() >= K.n:
        raise IndexError("constrained DOF out of range")

    constrained = np.zeros(K.n, dtype=bool)
    constrained[dofs] = True
    value_of = np.zeros(K.n)
    value_of[dofs] = values

    rows = K2.row_of_entry()
    col_constrained = constrained[K2.indices]
    row_constrained = constrained[rows]

    # move coupling columns to the RHS (only rows that stay free)
    moving = col_constrained & ~row_constrained
    np.subtract.at(R2, rows[moving], K2.data[moving] * value_of[K2.indices[moving]])
    # zero constrained rows and columns, then unit diagonal
    K2.data[col_constrained | row_constrained] = 0.0
    diag = K2.diagonal_positions()
    K2.data[diag[dofs]] = 1.0
    R2[dofs] = values
    return K2, R2


def linear_solve(K: SparseMatrixCSR, b: np.ndarray, rel_tol: float = 1e-10):
    """Direct sparse solve with residual verification.

    Tries a symmetric-mode factorization (fill-reducing AMD-style ordering,
    no off-diagonal pivoting) first and falls back to partial-pivoting LU.
    """
    b = np.asarray(b, dtype=np.float64)
    if b.shape != (K.n,):
        raise ValueError(f"rhs has shape {b.shape}, expected ({K.n},)")
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        return np.zeros(K.n)
    A = K.to_scipy().tocsc()

    def attempt(**kw):
        lu = spla.splu(A, **kw)
        x = lu.solve(b)
        if not np.all(np.isfinite(x)):
            raise LinearSolveError("factorization produced non-finite values")
        res = float(np.linalg.norm(A @ x - b)) / bnorm
        return x, res

    errors = []
    try:
        x, res = attempt(permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0,
                         options={"SymmetricMode": True})
        if res <= rel_tol:
            return x
        errors.append(f"symmetric-mode residual {res:.3e}")
    except (RuntimeError, LinearSolveError) as e:
        errors.append(f"symmetric mode: {e}")
    try:
        x, res = attempt()
        if res <= rel_tol:
            return x
        errors.append(f"LU residual {res:.3e}")
    except (RuntimeError, LinearSolveError) as e:
        errors.append(f"LU: {e}")
    raise LinearSolveError("linear solve failed: " + "; ".join(errors))
