"""Immutable scalar expression DAG with symbolic differentiation.

Nodes are hash-consed: structurally equal subtrees are represented by the
same object, so ``a is b`` implies structural equality.  This makes common
subexpression detection during tape compilation a single identity lookup
and keeps repeated differentiation from blowing up the graph.

Construction goes through the smart constructors (`add`, `mul`, ...), which
apply the local simplification rules (constant folding, x+0, x*1, x*0,
x**1) eagerly.  `simplify` re-runs the same rules bottom-up; it is a no-op
on anything built through this module but normalizes graphs assembled from
raw pieces.
"""

from __future__ import annotations

import math
from typing import Iterable

__all__ = [
    "Expr",
    "ExprError",
    "EvalDomainError",
    "constant",
    "parameter",
    "variable",
    "add",
    "sub",
    "mul",
    "div",
    "neg",
    "ln",
    "exp",
    "powi",
    "ZERO",
    "ONE",
    "differentiate",
    "simplify",
    "substitute",
    "eval_expr",
    "leaves_of",
    "count_nodes",
]


class ExprError(ValueError):
    """Raised for malformed expression construction."""


class EvalDomainError(ArithmeticError):
    """Raised when evaluation hits ln(x<=0), division by zero or 0**-n."""


_LEAF_OPS = ("const", "param", "var")
_UNARY_OPS = ("neg", "ln", "exp")
_BINARY_OPS = ("add", "sub", "mul", "div")
# "powi" is unary with an integer attribute.


class Expr:
    """One node of the scalar DAG.  Do not instantiate directly."""

    __slots__ = ("op", "args", "data", "_hash")

    op: str
    args: tuple["Expr", ...]
    data: object

    def __init__(self, op, args, data):
        object.__setattr__(self, "op", op)
        object.__setattr__(self, "args", args)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "_hash", hash((op, tuple(id(a) for a in args), data)))

    def __setattr__(self, name, value):
        raise AttributeError("Expr nodes are immutable")

    def __hash__(self):
        return self._hash

    # Identity *is* structural equality thanks to interning; default object
    # __eq__ is therefore correct and cheap.

    @property
    def is_leaf(self):
        return self.op in _LEAF_OPS

    def __repr__(self):
        if self.op == "const":
            return f"const({self.data!r})"
        if self.op == "param":
            return f"param({self.data!r})"
        if self.op == "var":
            name, idx = self.data
            return f"var({name!r}, {idx})"
        if self.op == "powi":
            return f"powi({self.args[0]!r}, {self.data})"
        return f"{self.op}({', '.join(map(repr, self.args))})"

    # Arithmetic sugar so material definitions read like formulas.
    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return sub(self, as_expr(other))

    def __rsub__(self, other):
        return sub(as_expr(other), self)

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return div(self, as_expr(other))

    def __rtruediv__(self, other):
        return div(as_expr(other), self)

    def __pow__(self, n):
        return powi(self, n)

    def __neg__(self):
        return neg(self)


_interned: dict[tuple, Expr] = {}


def _node(op, args=(), data=None):
    key = (op, tuple(id(a) for a in args), data)
    node = _interned.get(key)
    if node is None:
        node = Expr(op, tuple(args), data)
        node = _interned.setdefault(key, node)
    return node


def as_expr(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, float)):
        return constant(float(x))
    raise ExprError(f"cannot interpret {x!r} as a scalar expression")


def constant(value: float) -> Expr:
    value = float(value)
    if value == 0.0:
        value = 0.0  # collapse -0.0 so x - x and 0 share one node
    return _node("const", (), value)


def parameter(name: str) -> Expr:
    return _node("param", (), str(name))


def variable(name: str, index: int) -> Expr:
    return _node("var", (), (str(name), int(index)))


ZERO = constant(0.0)
ONE = constant(1.0)


def _const_val(e: Expr):
    return e.data if e.op == "const" else None


def add(a: Expr, b: Expr) -> Expr:
    if a.op == "const" and b.op == "const":
        return constant(a.data + b.data)
    if a is ZERO:
        return b
    if b is ZERO:
        return a
    return _node("add", (a, b))


def sub(a: Expr, b: Expr) -> Expr:
    if a.op == "const" and b.op == "const":
        return constant(a.data - b.data)
    if b is ZERO:
        return a
    if a is b:
        return ZERO
    return _node("sub", (a, b))


def mul(a: Expr, b: Expr) -> Expr:
    if a.op == "const" and b.op == "const":
        return constant(a.data * b.data)
    if a is ZERO or b is ZERO:
        return ZERO
    if a is ONE:
        return b
    if b is ONE:
        return a
    return _node("mul", (a, b))


def div(a: Expr, b: Expr) -> Expr:
    # Division by a constant zero is left in the graph: the domain rule is
    # checked at evaluation time, not at build time.
    if a.op == "const" and b.op == "const" and b.data != 0.0:
        return constant(a.data / b.data)
    if b is ONE:
        return a
    if a is ZERO:
        return ZERO
    return _node("div", (a, b))


def neg(a: Expr) -> Expr:
    if a.op == "const":
        return constant(-a.data)
    if a.op == "neg":
        return a.args[0]
    return _node("neg", (a,))


def ln(a: Expr) -> Expr:
    a = as_expr(a)
    if a.op == "const" and a.data > 0.0:
        return constant(math.log(a.data))
    return _node("ln", (a,))


def exp(a: Expr) -> Expr:
    a = as_expr(a)
    if a.op == "const":
        return constant(math.exp(a.data))
    return _node("exp", (a,))


def powi(a: Expr, n) -> Expr:
    """Integer power.  Fractional powers are spelled exp(q*ln(x))."""
    if isinstance(n, Expr):
        if n.op != "const" or not float(n.data).is_integer():
            raise ExprError("pow exponent must be an integer constant")
        n = n.data
    if not float(n).is_integer():
        raise ExprError(f"pow exponent must be an integer, got {n!r}")
    n = int(n)
    if n == 0:
        return ONE
    if n == 1:
        return a
    if a.op == "const":
        if a.data == 0.0 and n < 0:
            return _node("powi", (a,), n)  # domain error at eval time
        return constant(a.data ** n)
    return _node("powi", (a,), n)


_DIFF_DISPATCH = {}


def differentiate(e: Expr, v: Expr) -> Expr:
    """Exact partial derivative of ``e`` with respect to the variable leaf ``v``.

    Returns the zero node when ``v`` does not occur in ``e``.  Composable:
    second derivatives are just two applications.
    """
    if v.op != "var":
        raise ExprError(f"can only differentiate with respect to a variable leaf, got {v.op}")
    memo: dict[Expr, Expr] = {}

    def d(node: Expr) -> Expr:
        got = memo.get(node)
        if got is not None:
            return got
        op = node.op
        if op in ("const", "param"):
            res = ZERO
        elif op == "var":
            res = ONE if node is v else ZERO
        elif op == "add":
            res = add(d(node.args[0]), d(node.args[1]))
        elif op == "sub":
            res = sub(d(node.args[0]), d(node.args[1]))
        elif op == "mul":
            a, b = node.args
            res = add(mul(d(a), b), mul(a, d(b)))
        elif op == "div":
            a, b = node.args
            # (a/b)' = a'/b - a b'/b^2
            res = sub(div(d(a), b), div(mul(a, d(b)), mul(b, b)))
        elif op == "neg":
            res = neg(d(node.args[0]))
        elif op == "ln":
            res = div(d(node.args[0]), node.args[0])
        elif op == "exp":
            res = mul(node, d(node.args[0]))
        elif op == "powi":
            a = node.args[0]
            n = node.data
            res = mul(mul(constant(n), powi(a, n - 1)), d(a))
        else:  # pragma: no cover
            raise ExprError(f"unknown op {op!r}")
        memo[node] = res
        return res

    return d(e)


def _postorder(roots: Iterable[Expr]):
    """Iterative postorder over the DAG, each node exactly once."""
    seen = set()
    order = []
    stack = [(r, False) for r in roots]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for a in node.args:
            if id(a) not in seen:
                stack.append((a, False))
    return order


def simplify(e: Expr) -> Expr:
    """Rebuild bottom-up through the smart constructors.

    Value preserving: where both sides are defined, evaluation agrees
    exactly (same arithmetic, no reassociation).
    """
    rebuilt: dict[Expr, Expr] = {}
    for node in _postorder([e]):
        if node.is_leaf:
            rebuilt[node] = node
            continue
        args = tuple(rebuilt[a] for a in node.args)
        op = node.op
        if op == "add":
            rebuilt[node] = add(*args)
        elif op == "sub":
            rebuilt[node] = sub(*args)
        elif op == "mul":
            rebuilt[node] = mul(*args)
        elif op == "div":
            rebuilt[node] = div(*args)
        elif op == "neg":
            rebuilt[node] = neg(args[0])
        elif op == "ln":
            rebuilt[node] = ln(args[0])
        elif op == "exp":
            rebuilt[node] = exp(args[0])
        elif op == "powi":
            rebuilt[node] = powi(args[0], node.data)
        else:  # pragma: no cover
            raise ExprError(f"unknown op {op!r}")
    return rebuilt[e]


def substitute(e: Expr, mapping: dict[Expr, Expr]) -> Expr:
    """Replace leaf nodes by expressions (used to compose fields)."""
    for k in mapping:
        if not k.is_leaf:
            raise ExprError("substitute only replaces leaf nodes")
    rebuilt: dict[Expr, Expr] = {}
    for node in _postorder([e]):
        if node in mapping:
            rebuilt[node] = mapping[node]
        elif node.is_leaf:
            rebuilt[node] = node
        else:
            args = tuple(rebuilt[a] for a in node.args)
            if node.op == "powi":
                rebuilt[node] = powi(args[0], node.data)
            else:
                ctor = {"add": add, "sub": sub, "mul": mul, "div": div,
                        "neg": neg, "ln": ln, "exp": exp}[node.op]
                rebuilt[node] = ctor(*args)
    return rebuilt[e]


def eval_expr(e: Expr, bindings: dict[Expr, float]) -> float:
    """Reference recursive evaluator (float64 arithmetic via numpy scalars).

    Serves as the independent oracle for the compiled tape: same operation
    order as the DAG, no CSE-induced reassociation.
    """
    import numpy as np

    values: dict[Expr, float] = {}
    for node in _postorder([e]):
        op = node.op
        if op == "const":
            values[node] = np.float64(node.data)
        elif op in ("param", "var"):
            try:
                values[node] = np.float64(bindings[node])
            except KeyError:
                raise ExprError(f"unbound leaf {node!r}") from None
        elif op == "add":
            values[node] = values[node.args[0]] + values[node.args[1]]
        elif op == "sub":
            values[node] = values[node.args[0]] - values[node.args[1]]
        elif op == "mul":
            values[node] = values[node.args[0]] * values[node.args[1]]
        elif op == "div":
            b = values[node.args[1]]
            if b == 0.0:
                raise EvalDomainError("division by zero")
            values[node] = values[node.args[0]] / b
        elif op == "neg":
            values[node] = -values[node.args[0]]
        elif op == "ln":
            a = values[node.args[0]]
            if a <= 0.0:
                raise EvalDomainError("ln of non-positive value")
            values[node] = np.log(a)
        elif op == "exp":
            values[node] = np.exp(values[node.args[0]])
        elif op == "powi":
            a = values[node.args[0]]
            if a == 0.0 and node.data < 0:
                raise EvalDomainError("zero raised to a negative power")
            values[node] = np.float64(a) ** node.data
        else:  # pragma: no cover
            raise ExprError(f"unknown op {op!r}")
    return float(values[e])


def leaves_of(roots: Iterable[Expr]) -> list[Expr]:
    """All distinct var/param leaves, in first-encounter (postorder) order."""
    return [n for n in _postorder(list(roots)) if n.op in ("var", "param")]


def count_nodes(roots: Iterable[Expr]) -> int:
    return len(_postorder(list(roots)))
