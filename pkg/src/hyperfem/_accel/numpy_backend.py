"""Pure-numpy implementations of the hot kernels.

Each tape instruction becomes one vectorized array operation over the
whole batch of evaluation points; the contraction helpers are einsum
calls.  Semantics match the compiled lane instruction for instruction.
"""

import numpy as np

# Rebound to the package-level KernelDomainError by _accel.__init__.
DomainError = ArithmeticError

_ADD, _SUB, _MUL, _DIV, _NEG, _LN, _EXP, _POWI = range(8)


def run_tape(ops, arg1, arg2, out, slots):
    """Execute the instruction tape in place on ``slots`` (n_slots, n_points).

    Input and constant slots must be pre-filled by the caller.
    """
    for k in range(len(ops)):
        op = ops[k]
        a = slots[arg1[k]]
        o = slots[out[k]]
        if op == _ADD:
            np.add(a, slots[arg2[k]], out=o)
        elif op == _SUB:
            np.subtract(a, slots[arg2[k]], out=o)
        elif op == _MUL:
            np.multiply(a, slots[arg2[k]], out=o)
        elif op == _DIV:
            b = slots[arg2[k]]
            if np.any(b == 0.0):
                raise DomainError(
                    "non-invertible deformation state (division by zero "
                    f"at instruction {k})")
            np.divide(a, b, out=o)
        elif op == _NEG:
            np.negative(a, out=o)
        elif op == _LN:
            if np.any(a <= 0.0):
                raise DomainError(
                    "non-invertible deformation state (ln of non-positive "
                    f"value at instruction {k})")
            np.log(a, out=o)
        elif op == _EXP:
            np.exp(a, out=o)
        elif op == _POWI:
            n = int(arg2[k])
            if n < 0 and np.any(a == 0.0):
                raise DomainError(
                    "non-invertible deformation state (zero base with "
                    f"negative power at instruction {k})")
            np.power(a, n, out=o)
        else:  # pragma: no cover
            raise ValueError(f"unknown opcode {op}")


def element_residuals(wdet, gradN, P):
    """Per-element internal force vectors.

    R[e, 3a+i] = sum_q wdet[e,q] * P[e,q,i,k] * gradN[e,q,a,k]

    Parameters
    ----------
    wdet : (E, Q)          quadrature weight times |det J|
    gradN : (E, Q, n, 3)   physical shape-function gradients
    P : (E, Q, 3, 3)       first Piola-Kirchhoff stress per point

    Returns
    -------
    (E, 3n) array, node-major DOF ordering.
    """
    E, Q, n, _ = gradN.shape
    R = np.einsum("eq,eqik,eqak->eai", wdet, P, gradN, optimize=True)
    return R.reshape(E, 3 * n)


def element_matrices(wdet, gradN, A):
    """Per-element tangent matrices.

    K[e, 3a+i, 3b+j] = sum_q wdet[e,q] * gradN[e,q,a,k] * A[e,q,i,k,j,l]
                       * gradN[e,q,b,l]
    """
    E, Q, n, _ = gradN.shape
    T = np.einsum("eqikjl,eqbl->eqikbj", A, gradN, optimize=True)
    K = np.einsum("eq,eqak,eqikbj->eaibj", wdet, gradN, T, optimize=True)
    return K.reshape(E, 3 * n, 3 * n)
