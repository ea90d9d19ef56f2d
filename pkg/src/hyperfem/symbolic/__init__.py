"""Symbolic core: scalar DAG, tensor algebra, differentiation, tape compiler."""

from .expr import (Expr, ExprError, EvalDomainError, constant, parameter,
                   variable, add, sub, mul, div, neg, ln, exp, powi,
                   differentiate, simplify, substitute, eval_expr,
                   leaves_of, count_nodes)
from .tensor import (TensorExpr, TensorShapeError, tensor, scalar, vector,
                     matrix, identity, transpose, trace, det3, inv3, ddot, dot)
from .tape import Kernel, CompileError, compile_tape, eval_tape, OPS

__all__ = [
    "Expr", "ExprError", "EvalDomainError", "constant", "parameter",
    "variable", "add", "sub", "mul", "div", "neg", "ln", "exp", "powi",
    "differentiate", "simplify", "substitute", "eval_expr", "leaves_of",
    "count_nodes",
    "TensorExpr", "TensorShapeError", "tensor", "scalar", "vector", "matrix",
    "identity", "transpose", "trace", "det3", "inv3", "ddot", "dot",
    "Kernel", "CompileError", "compile_tape", "eval_tape", "OPS",
]
