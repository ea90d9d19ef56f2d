"""Lowering of expression DAGs to a flat, CSE'd instruction tape.

The tape is a single-assignment slot machine: slots [0, n_inputs) hold the
inputs, the next n_consts slots hold literal constants, and every
instruction writes one fresh slot computed from earlier ones.  Because the
DAG is hash-consed, emitting each node exactly once *is* common
subexpression elimination.

Evaluation is delegated to the active backend in ``hyperfem._accel``
(compiled extension when built, vectorized numpy otherwise); both follow
the identical instruction order, so results are deterministic.
"""

from __future__ import annotations

import numpy as np

from .expr import Expr, ExprError, _postorder

__all__ = ["Kernel", "CompileError", "compile_tape", "eval_tape", "OPS"]

# Opcode numbering shared with both backends.
OPS = {"add": 0, "sub": 1, "mul": 2, "div": 3, "neg": 4, "ln": 5, "exp": 6, "powi": 7}
_OP_NAMES = {v: k for k, v in OPS.items()}


class CompileError(ValueError):
    pass


class Kernel:
    """Flattened instruction tape computing a fixed list of outputs.

    Immutable after construction; evaluation uses a caller-owned scratch
    buffer, so one Kernel can be shared across threads.
    """

    __slots__ = ("ops", "arg1", "arg2", "out", "n_inputs", "n_slots",
                 "const_vals", "input_leaves", "output_slots",
                 "requires_positive_domain")

    def __init__(self, ops, arg1, arg2, out, n_inputs, n_slots, const_vals,
                 input_leaves, output_slots):
        self.ops = np.asarray(ops, dtype=np.int32)
        self.arg1 = np.asarray(arg1, dtype=np.int32)
        self.arg2 = np.asarray(arg2, dtype=np.int32)
        self.out = np.asarray(out, dtype=np.int32)
        self.n_inputs = int(n_inputs)
        self.n_slots = int(n_slots)
        self.const_vals = np.asarray(const_vals, dtype=np.float64)
        self.input_leaves = tuple(input_leaves)
        self.output_slots = np.asarray(output_slots, dtype=np.int32)
        for arr in (self.ops, self.arg1, self.arg2, self.out,
                    self.const_vals, self.output_slots):
            arr.setflags(write=False)
        # ln, division by a non-constant, or a negative power of a
        # non-constant restrict the admissible inputs
        nc = len(self.const_vals)

        def safe_slot(s):
            return (self.n_inputs <= s < self.n_inputs + nc
                    and self.const_vals[s - self.n_inputs] != 0.0)

        unsafe = np.any(self.ops == OPS["ln"])
        for k in range(len(self.ops)):
            if self.ops[k] == OPS["div"] and not safe_slot(self.arg2[k]):
                unsafe = True
            elif (self.ops[k] == OPS["powi"] and self.arg2[k] < 0
                  and not safe_slot(self.arg1[k])):
                unsafe = True
        self.requires_positive_domain = bool(unsafe)

    @property
    def n_instructions(self):
        return len(self.ops)

    @property
    def n_outputs(self):
        return len(self.output_slots)

    def new_scratch(self, n_points: int) -> np.ndarray:
        """Fresh evaluation buffer; allocate one per thread."""
        return np.empty((self.n_slots, n_points), dtype=np.float64)

    def evaluate(self, inputs: np.ndarray, scratch: np.ndarray | None = None) -> np.ndarray:
        """Run the tape on a batch of input rows.

        Parameters
        ----------
        inputs : (n_points, n_inputs) or (n_inputs,) float array
        scratch : optional buffer from :meth:`new_scratch`

        Returns
        -------
        (n_points, n_outputs) array (or (n_outputs,) for a single row).
        """
        from .. import _accel

        inputs = np.asarray(inputs, dtype=np.float64)
        single = inputs.ndim == 1
        if single:
            inputs = inputs[None, :]
        if inputs.shape[1] != self.n_inputs:
            raise ValueError(
                f"kernel expects {self.n_inputs} inputs, got {inputs.shape[1]}")
        n = inputs.shape[0]
        if scratch is None or scratch.shape != (self.n_slots, n):
            scratch = self.new_scratch(n)
        scratch[:self.n_inputs, :] = inputs.T
        nc = len(self.const_vals)
        if nc:
            scratch[self.n_inputs:self.n_inputs + nc, :] = self.const_vals[:, None]
        _accel.run_tape(self.ops, self.arg1, self.arg2, self.out, scratch)
        res = scratch[self.output_slots, :].T.copy()
        return res[0] if single else res

    def dump(self) -> str:
        """Plain-text listing, one instruction per line (for golden tests)."""
        lines = []
        for k in range(self.n_instructions):
            op = _OP_NAMES[int(self.ops[k])]
            a, b, o = int(self.arg1[k]), int(self.arg2[k]), int(self.out[k])
            if op in ("neg", "ln", "exp"):
                lines.append(f"slot_{o} = {op} slot_{a}")
            elif op == "powi":
                lines.append(f"slot_{o} = powi slot_{a} {b}")
            else:
                lines.append(f"slot_{o} = {op} slot_{a} slot_{b}")
        return "\n".join(lines) + ("\n" if lines else "")


def compile_tape(outputs, input_layout) -> Kernel:
    """Lower a list of scalar roots to a Kernel.

    ``input_layout`` is the ordered sequence of var/param leaves that will
    be bound at evaluation time.  Every leaf reachable from ``outputs``
    must appear in it.
    """
    outputs = list(outputs)
    layout = list(input_layout)
    for leaf in layout:
        if not isinstance(leaf, Expr) or leaf.op not in ("var", "param"):
            raise CompileError(f"input layout entries must be var/param leaves, got {leaf!r}")
    slot_of: dict[Expr, int] = {}
    for i, leaf in enumerate(layout):
        if leaf in slot_of:
            raise CompileError(f"duplicate input leaf {leaf!r}")
        slot_of[leaf] = i
    n_inputs = len(layout)

    order = _postorder(outputs)
    const_vals = []
    for node in order:
        if node.op == "const":
            slot_of[node] = n_inputs + len(const_vals)
            const_vals.append(node.data)
        elif node.op in ("var", "param") and node not in slot_of:
            name = node.data if node.op == "param" else f"{node.data[0]}[{node.data[1]}]"
            raise CompileError(f"unbound leaf {name!r} not present in input layout")

    ops, arg1, arg2, out = [], [], [], []
    next_slot = n_inputs + len(const_vals)

    for node in order:
        if node.is_leaf:
            continue
        a = slot_of[node.args[0]]
        if node.op == "powi":
            b = int(node.data)
        elif len(node.args) == 2:
            b = slot_of[node.args[1]]
        else:
            b = -1
        ops.append(OPS[node.op])
        arg1.append(a)
        arg2.append(b)
        out.append(next_slot)
        slot_of[node] = next_slot
        next_slot += 1

    output_slots = [slot_of[o] for o in outputs]
    return Kernel(ops, arg1, arg2, out, n_inputs, next_slot, const_vals,
                  layout, output_slots)


def eval_tape(kernel: Kernel, values, scratch=None):
    """Evaluate with inputs given per leaf (dict or ordered sequence)."""
    if isinstance(values, dict):
        row = np.empty(kernel.n_inputs, dtype=np.float64)
        for i, leaf in enumerate(kernel.input_leaves):
            try:
                row[i] = values[leaf]
            except KeyError:
                name = leaf.data if leaf.op == "param" else leaf.data[0] + str(leaf.data[1])
                raise ExprError(f"missing value for input {name!r}") from None
    else:
        row = np.asarray(values, dtype=np.float64)
    return kernel.evaluate(row, scratch)
