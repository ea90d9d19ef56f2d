# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: tape interpreter and element contractions.

Semantics mirror numpy_backend instruction for instruction; run_tape
returns the index of the first instruction that left the admissible
domain (ln/div/negative power), or -1 on success.
"""

from libc.math cimport exp as c_exp
from libc.math cimport log as c_log

import numpy as np

cimport cython


cdef inline double ipow(double x, int n) nogil:
    cdef double r = 1.0
    cdef double base = x
    cdef int m = n if n >= 0 else -n
    while m:
        if m & 1:
            r *= base
        base *= base
        m >>= 1
    if n < 0:
        r = 1.0 / r
    return r


cdef Py_ssize_t _run(const int[::1] ops, const int[::1] arg1,
                     const int[::1] arg2, const int[::1] out,
                     double[:, ::1] slots) noexcept nogil:
    cdef Py_ssize_t m = ops.shape[0]
    cdef Py_ssize_t n = slots.shape[1]
    cdef Py_ssize_t k, i
    cdef int op, a, b, o
    for k in range(m):
        op = ops[k]
        a = arg1[k]
        b = arg2[k]
        o = out[k]
        if op == 0:      # add
            for i in range(n):
                slots[o, i] = slots[a, i] + slots[b, i]
        elif op == 1:    # sub
            for i in range(n):
                slots[o, i] = slots[a, i] - slots[b, i]
        elif op == 2:    # mul
            for i in range(n):
                slots[o, i] = slots[a, i] * slots[b, i]
        elif op == 3:    # div
            for i in range(n):
                if slots[b, i] == 0.0:
                    return k
            for i in range(n):
                slots[o, i] = slots[a, i] / slots[b, i]
        elif op == 4:    # neg
            for i in range(n):
                slots[o, i] = -slots[a, i]
        elif op == 5:    # ln
            for i in range(n):
                if slots[a, i] <= 0.0:
                    return k
            for i in range(n):
                slots[o, i] = c_log(slots[a, i])
        elif op == 6:    # exp
            for i in range(n):
                slots[o, i] = c_exp(slots[a, i])
        else:            # powi, exponent in arg2
            if b < 0:
                for i in range(n):
                    if slots[a, i] == 0.0:
                        return k
            for i in range(n):
                slots[o, i] = ipow(slots[a, i], b)
    return -1


def run_tape(const int[::1] ops, const int[::1] arg1, const int[::1] arg2,
             const int[::1] out, double[:, ::1] slots):
    cdef Py_ssize_t bad
    with nogil:
        bad = _run(ops, arg1, arg2, out, slots)
    return bad


def element_residuals(const double[:, ::1] wdet,
                      const double[:, :, :, ::1] gradN,
                      const double[:, :, :, ::1] P):
    """R[e, 3a+i] = sum_q wdet[e,q] P[e,q,i,k] gradN[e,q,a,k]"""
    cdef Py_ssize_t E = gradN.shape[0]
    cdef Py_ssize_t Q = gradN.shape[1]
    cdef Py_ssize_t nn = gradN.shape[2]
    R_arr = np.zeros((E, 3 * nn))
    cdef double[:, ::1] R = R_arr
    cdef Py_ssize_t e, q, a, i, k
    cdef double w, acc
    with nogil:
        for e in range(E):
            for q in range(Q):
                w = wdet[e, q]
                for a in range(nn):
                    for i in range(3):
                        acc = 0.0
                        for k in range(3):
                            acc += P[e, q, i, k] * gradN[e, q, a, k]
                        R[e, 3 * a + i] += w * acc
    return R_arr


def element_matrices(const double[:, ::1] wdet,
                     const double[:, :, :, ::1] gradN,
                     const double[:, :, :, :, :, ::1] A):
    """K[e,3a+i,3b+j] = sum_q wdet gradN[a,k] A[i,k,j,l] gradN[b,l]"""
    cdef Py_ssize_t E = gradN.shape[0]
    cdef Py_ssize_t Q = gradN.shape[1]
    cdef Py_ssize_t nn = gradN.shape[2]
    if nn > 32:
        raise ValueError("element has more than 32 nodes")
    K_arr = np.zeros((E, 3 * nn, 3 * nn))
    cdef double[:, :, ::1] K = K_arr
    cdef double tmp[3][3][32][3]   # tmp[i][k][b][j] = sum_l A[i,k,j,l] gradN[b,l]
    cdef Py_ssize_t e, q, a, b, i, j, k, l
    cdef double w, acc
    with nogil:
        for e in range(E):
            for q in range(Q):
                w = wdet[e, q]
                for i in range(3):
                    for k in range(3):
                        for b in range(nn):
                            for j in range(3):
                                acc = 0.0
                                for l in range(3):
                                    acc += A[e, q, i, k, j, l] * gradN[e, q, b, l]
                                tmp[i][k][b][j] = acc
                for a in range(nn):
                    for i in range(3):
                        for b in range(nn):
                            for j in range(3):
                                acc = 0.0
                                for k in range(3):
                                    acc += gradN[e, q, a, k] * tmp[i][k][b][j]
                                K[e, 3 * a + i, 3 * b + j] += w * acc
    return K_arr
