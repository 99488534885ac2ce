# cython: language_level=3
"""Compiled hot kernels: batched gate sweeps and the SMO dual solver.

Contract is shared with ``_pycore``; see that module for the argument
layout. Both loops release the GIL.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, sqrt, INFINITY

cnp.import_array()

cdef enum:
    OP_H = 1
    OP_RZ = 2
    OP_CNOT = 3


def apply_ops(double complex[:, ::1] states, long[:, ::1] ops, double[:, ::1] angles):
    cdef Py_ssize_t n_samples = states.shape[0]
    cdef Py_ssize_t dim = states.shape[1]
    cdef Py_ssize_t n_ops = ops.shape[0]
    cdef Py_ssize_t s, k, i, j
    cdef long kind, bit, cbit
    cdef double r = 1.0 / sqrt(2.0)
    cdef double c, sn
    cdef double complex a, b, ph0, ph1
    with nogil:
        for s in range(n_samples):
            for k in range(n_ops):
                kind = ops[k, 0]
                bit = 1 << ops[k, 1]
                if kind == OP_H:
                    for i in range(dim):
                        if not (i & bit):
                            j = i | bit
                            a = states[s, i]
                            b = states[s, j]
                            states[s, i] = (a + b) * r
                            states[s, j] = (a - b) * r
                elif kind == OP_RZ:
                    c = cos(angles[s, ops[k, 3]])
                    sn = sin(angles[s, ops[k, 3]])
                    ph0 = c - 1j * sn
                    ph1 = c + 1j * sn
                    for i in range(dim):
                        if i & bit:
                            states[s, i] = states[s, i] * ph1
                        else:
                            states[s, i] = states[s, i] * ph0
                elif kind == OP_CNOT:
                    cbit = 1 << ops[k, 2]
                    for i in range(dim):
                        if (i & cbit) and not (i & bit):
                            j = i | bit
                            a = states[s, i]
                            states[s, i] = states[s, j]
                            states[s, j] = a


def smo(double[:, ::1] K, double[::1] y, double C, double tol, long max_iter):
    cdef Py_ssize_t n = K.shape[0]
    cdef Py_ssize_t t, i, j
    cdef long it = 0
    cdef double tau = 1e-12
    cdef double gmax, gmin, v, quad, delta, diff, total
    cdef double old_ai, old_aj, dai, daj, yg, ub, lb, sum_free
    cdef Py_ssize_t nr_free
    cdef bint up, low
    alpha_arr = np.zeros(n, dtype=np.float64)
    grad_arr = -np.ones(n, dtype=np.float64)
    cdef double[::1] alpha = alpha_arr
    cdef double[::1] G = grad_arr
    cdef double gap_c = INFINITY
    with nogil:
        while True:
            gmax = -INFINITY
            gmin = INFINITY
            i = -1
            j = -1
            for t in range(n):
                if y[t] > 0:
                    up = alpha[t] < C
                    low = alpha[t] > 0
                else:
                    up = alpha[t] > 0
                    low = alpha[t] < C
                v = -y[t] * G[t]
                if up and v > gmax:
                    gmax = v
                    i = t
                if low and v < gmin:
                    gmin = v
                    j = t
            gap_c = gmax - gmin
            if i < 0 or j < 0 or gap_c < tol or it >= max_iter:
                break
            it += 1
            old_ai = alpha[i]
            old_aj = alpha[j]
            if y[i] != y[j]:
                quad = K[i, i] + K[j, j] - 2.0 * K[i, j]
                if quad <= 0:
                    quad = tau
                delta = (-G[i] - G[j]) / quad
                diff = alpha[i] - alpha[j]
                alpha[i] += delta
                alpha[j] += delta
                if diff > 0:
                    if alpha[j] < 0:
                        alpha[j] = 0
                        alpha[i] = diff
                else:
                    if alpha[i] < 0:
                        alpha[i] = 0
                        alpha[j] = -diff
                if diff > 0:
                    if alpha[i] > C:
                        alpha[i] = C
                        alpha[j] = C - diff
                else:
                    if alpha[j] > C:
                        alpha[j] = C
                        alpha[i] = C + diff
            else:
                quad = K[i, i] + K[j, j] - 2.0 * K[i, j]
                if quad <= 0:
                    quad = tau
                delta = (G[i] - G[j]) / quad
                total = alpha[i] + alpha[j]
                alpha[i] -= delta
                alpha[j] += delta
                if total > C:
                    if alpha[i] > C:
                        alpha[i] = C
                        alpha[j] = total - C
                else:
                    if alpha[j] < 0:
                        alpha[j] = 0
                        alpha[i] = total
                if total > C:
                    if alpha[j] > C:
                        alpha[j] = C
                        alpha[i] = total - C
                else:
                    if alpha[i] < 0:
                        alpha[i] = 0
                        alpha[j] = total
            dai = alpha[i] - old_ai
            daj = alpha[j] - old_aj
            for t in range(n):
                G[t] += y[t] * (y[i] * K[t, i] * dai + y[j] * K[t, j] * daj)

        ub = INFINITY
        lb = -INFINITY
        sum_free = 0.0
        nr_free = 0
        for t in range(n):
            yg = y[t] * G[t]
            if alpha[t] >= C:
                if y[t] < 0:
                    ub = min(ub, yg)
                else:
                    lb = max(lb, yg)
            elif alpha[t] <= 0:
                if y[t] > 0:
                    ub = min(ub, yg)
                else:
                    lb = max(lb, yg)
            else:
                nr_free += 1
                sum_free += yg
        if nr_free > 0:
            sum_free = sum_free / nr_free
        else:
            sum_free = (ub + lb) / 2.0
    return alpha_arr, -sum_free, it, gap_c
