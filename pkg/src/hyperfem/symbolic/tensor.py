"""Tensor-shaped views over the scalar DAG and the matrix algebra on them.

A TensorExpr is a shape plus a row-major tuple of scalar nodes; all the
actual arithmetic lives in the scalar layer.  Shapes are () for scalars,
(n,) for vectors and (rows, cols) for matrices.  3x3 inverses are built as
adjugate over determinant, which introduces exactly one division by det
per entry and keeps the graph polynomial-sized.
"""

from __future__ import annotations

from . import expr as ex
from .expr import Expr, as_expr

__all__ = [
    "TensorExpr",
    "TensorShapeError",
    "tensor",
    "scalar",
    "vector",
    "matrix",
    "identity",
    "transpose",
    "trace",
    "det3",
    "inv3",
    "ddot",
    "dot",
]


class TensorShapeError(ValueError):
    pass


def _fmt(shape):
    return "scalar" if shape == () else str(shape)


class TensorExpr:
    __slots__ = ("shape", "entries")

    def __init__(self, shape, entries):
        shape = tuple(int(s) for s in shape)
        entries = tuple(as_expr(e) for e in entries)
        n = 1
        for s in shape:
            n *= s
        if len(entries) != n:
            raise TensorShapeError(
                f"shape {_fmt(shape)} needs {n} entries, got {len(entries)}")
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "entries", entries)

    def __setattr__(self, name, value):
        raise AttributeError("TensorExpr is immutable")

    def __getitem__(self, idx):
        if self.shape == ():
            raise TensorShapeError("cannot index a scalar")
        if len(self.shape) == 1:
            return self.entries[idx]
        i, j = idx
        return self.entries[i * self.shape[1] + j]

    @property
    def T(self):
        return transpose(self)

    def as_scalar(self) -> Expr:
        if self.shape != ():
            raise TensorShapeError(f"expected scalar, got shape {_fmt(self.shape)}")
        return self.entries[0]

    def __repr__(self):
        return f"TensorExpr(shape={_fmt(self.shape)}, {len(self.entries)} entries)"

    def _zip(self, other, fn):
        other = _as_tensor_like(other, self.shape)
        if other.shape != self.shape:
            raise TensorShapeError(
                f"shape mismatch: {_fmt(self.shape)} vs {_fmt(other.shape)}")
        return TensorExpr(self.shape, [fn(a, b) for a, b in zip(self.entries, other.entries)])

    def __add__(self, other):
        return self._zip(other, ex.add)

    def __radd__(self, other):
        return _as_tensor_like(other, self.shape) + self

    def __sub__(self, other):
        return self._zip(other, ex.sub)

    def __rsub__(self, other):
        return _as_tensor_like(other, self.shape) - self

    def __mul__(self, other):
        # scalar * tensor (scalar may be Expr, number, or scalar TensorExpr)
        s = _as_scalar_expr(other)
        return TensorExpr(self.shape, [ex.mul(e, s) for e in self.entries])

    def __rmul__(self, other):
        s = _as_scalar_expr(other)
        return TensorExpr(self.shape, [ex.mul(s, e) for e in self.entries])

    def __truediv__(self, other):
        s = _as_scalar_expr(other)
        return TensorExpr(self.shape, [ex.div(e, s) for e in self.entries])

    def __neg__(self):
        return TensorExpr(self.shape, [ex.neg(e) for e in self.entries])

    def __matmul__(self, other):
        return _matmul(self, other)


def _as_scalar_expr(x) -> Expr:
    if isinstance(x, TensorExpr):
        return x.as_scalar()
    return as_expr(x)


def _as_tensor_like(x, shape) -> TensorExpr:
    if isinstance(x, TensorExpr):
        return x
    if shape == ():
        return scalar(x)
    raise TensorShapeError(f"cannot combine {x!r} with tensor of shape {_fmt(shape)}")


def tensor(shape, entries) -> TensorExpr:
    return TensorExpr(shape, entries)


def scalar(e) -> TensorExpr:
    return TensorExpr((), [as_expr(e)])


def vector(entries) -> TensorExpr:
    entries = list(entries)
    return TensorExpr((len(entries),), entries)


def matrix(rows) -> TensorExpr:
    rows = [list(r) for r in rows]
    ncols = len(rows[0])
    if any(len(r) != ncols for r in rows):
        raise TensorShapeError("ragged rows")
    return TensorExpr((len(rows), ncols), [e for r in rows for e in r])


def identity(n=3) -> TensorExpr:
    return TensorExpr((n, n), [ex.ONE if i == j else ex.ZERO
                               for i in range(n) for j in range(n)])


def transpose(t: TensorExpr) -> TensorExpr:
    if t.shape == () or len(t.shape) == 1:
        return t
    r, c = t.shape
    return TensorExpr((c, r), [t[i, j] for j in range(c) for i in range(r)])


def _matmul(a: TensorExpr, b: TensorExpr) -> TensorExpr:
    if not isinstance(b, TensorExpr):
        raise TensorShapeError(f"matmul needs a TensorExpr, got {b!r}")
    ash, bsh = a.shape, b.shape
    if len(ash) == 2 and len(bsh) == 2:
        if ash[1] != bsh[0]:
            raise TensorShapeError(f"matmul shape mismatch: {_fmt(ash)} @ {_fmt(bsh)}")
        r, k, c = ash[0], ash[1], bsh[1]
        out = []
        for i in range(r):
            for j in range(c):
                s = ex.ZERO
                for m in range(k):
                    s = ex.add(s, ex.mul(a[i, m], b[m, j]))
                out.append(s)
        return TensorExpr((r, c), out)
    if len(ash) == 2 and len(bsh) == 1:
        if ash[1] != bsh[0]:
            raise TensorShapeError(f"matmul shape mismatch: {_fmt(ash)} @ {_fmt(bsh)}")
        out = []
        for i in range(ash[0]):
            s = ex.ZERO
            for m in range(ash[1]):
                s = ex.add(s, ex.mul(a[i, m], b[m]))
            out.append(s)
        return TensorExpr((ash[0],), out)
    if len(ash) == 1 and len(bsh) == 2:
        return transpose(_matmul(transpose(b), a))
    raise TensorShapeError(f"cannot matmul shapes {_fmt(ash)} and {_fmt(bsh)}")


def dot(a: TensorExpr, b: TensorExpr) -> TensorExpr:
    """Vector inner product, or matrix-vector / matrix-matrix product."""
    if len(a.shape) == 1 and len(b.shape) == 1:
        if a.shape != b.shape:
            raise TensorShapeError(f"dot shape mismatch: {_fmt(a.shape)} vs {_fmt(b.shape)}")
        s = ex.ZERO
        for x, y in zip(a.entries, b.entries):
            s = ex.add(s, ex.mul(x, y))
        return scalar(s)
    return _matmul(a, b)


def trace(t: TensorExpr) -> TensorExpr:
    if len(t.shape) != 2 or t.shape[0] != t.shape[1]:
        raise TensorShapeError(f"trace needs a square matrix, got {_fmt(t.shape)}")
    s = ex.ZERO
    for i in range(t.shape[0]):
        s = ex.add(s, t[i, i])
    return scalar(s)


def ddot(a: TensorExpr, b: TensorExpr) -> TensorExpr:
    """Double contraction A : B = sum_ij A_ij B_ij."""
    if a.shape != b.shape or len(a.shape) != 2:
        raise TensorShapeError(
            f"double contraction needs equal matrix shapes, got {_fmt(a.shape)} and {_fmt(b.shape)}")
    s = ex.ZERO
    for x, y in zip(a.entries, b.entries):
        s = ex.add(s, ex.mul(x, y))
    return scalar(s)


def _require_3x3(t: TensorExpr, what: str):
    if t.shape != (3, 3):
        raise TensorShapeError(f"{what} requires a 3x3 matrix, got {_fmt(t.shape)}")


def _cofactor(t: TensorExpr, i, j):
    rows = [r for r in range(3) if r != i]
    cols = [c for c in range(3) if c != j]
    m = ex.sub(ex.mul(t[rows[0], cols[0]], t[rows[1], cols[1]]),
               ex.mul(t[rows[0], cols[1]], t[rows[1], cols[0]]))
    return m if (i + j) % 2 == 0 else ex.neg(m)


def det3(t: TensorExpr) -> TensorExpr:
    _require_3x3(t, "det3")
    s = ex.ZERO
    for j in range(3):
        s = ex.add(s, ex.mul(t[0, j], _cofactor(t, 0, j)))
    return scalar(s)


def inv3(t: TensorExpr) -> TensorExpr:
    """Closed-form inverse: adjugate / det.  One div-by-det per entry."""
    _require_3x3(t, "inv3")
    d = det3(t).as_scalar()
    # inv[i,j] = cof[j,i] / det
    return TensorExpr((3, 3), [ex.div(_cofactor(t, j, i), d)
                               for i in range(3) for j in range(3)])
