"""Backend selection for the hot kernels.

Two interchangeable implementations of the tape interpreter and the
element contraction loops:

* ``_fastkernels`` — Cython extension, built at install time;
* ``numpy_backend`` — pure Python / vectorized numpy fallback.

The compiled one is used when importable.  Set ``HYPERFEM_PURE_PYTHON=1``
to force the fallback (the benchmark suite runs both).  Both lanes execute
the same instruction sequence; within a lane results are bitwise
reproducible.
"""

import os

from . import numpy_backend

__all__ = ["BACKEND", "KernelDomainError", "run_tape",
           "element_residuals", "element_matrices"]


class KernelDomainError(ArithmeticError):
    """Tape evaluation left the admissible domain (ln/div/negative power).

    Signals a non-invertible deformation state to the solver.
    """


numpy_backend.DomainError = KernelDomainError

_forced_pure = os.environ.get("HYPERFEM_PURE_PYTHON", "") == "1"
_compiled = None
if not _forced_pure:
    try:
        from . import _fastkernels as _compiled
    except ImportError:
        _compiled = None

if _compiled is not None:
    BACKEND = "compiled"

    def run_tape(ops, arg1, arg2, out, slots):
        bad = _compiled.run_tape(ops, arg1, arg2, out, slots)
        if bad >= 0:
            raise KernelDomainError(
                "non-invertible deformation state (tape domain violation "
                f"at instruction {bad})")

    element_residuals = _compiled.element_residuals
    element_matrices = _compiled.element_matrices
else:
    BACKEND = "python"
    run_tape = numpy_backend.run_tape
    element_residuals = numpy_backend.element_residuals
    element_matrices = numpy_backend.element_matrices
