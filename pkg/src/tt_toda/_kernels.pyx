# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled finite-difference kernel; mirrors ``_kernels_py.assemble``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp

cnp.import_array()


def assemble(vb_in, vc_in, lin_in, s_in, double h, double a, double b, alpha_in, bint robin, bint want_jac=True):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] vb = np.ascontiguousarray(vb_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] vc = np.ascontiguousarray(vc_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] lin = np.ascontiguousarray(lin_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] s = np.ascontiguousarray(s_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] alpha = np.ascontiguousarray(alpha_in, dtype=np.float64)
    cdef Py_ssize_t M = vb.shape[0]
    cdef Py_ssize_t n = vb.shape[1]
    cdef Py_ssize_t N = M * n
    cdef Py_ssize_t j, i, k, r
    cdef double ih2 = 1.0 / (h * h)
    cdef double w, d2b, d2c, nb, nc, pb, pc, f_i, coef
    cdef cnp.ndarray[cnp.float64_t, ndim=1] F = np.empty(N, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] ab
    cdef cnp.ndarray[cnp.float64_t, ndim=1] X = np.empty(n + 1, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] X0 = np.empty(n + 1, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] u = np.empty(n, dtype=np.float64)
    if want_jac:
        ab = np.zeros((2 * n + 1, N), dtype=np.float64)

    for j in range(M):
        w = exp(2.0 * s[j])
        for i in range(n):
            u[i] = (vb[j, i] + lin[j, i]) + vc[j, i]
        X[0] = exp(a * u[0])
        for k in range(1, n):
            X[k] = exp(u[k] - u[k - 1])
        X[n] = exp(-b * u[n - 1])
        if j == 0:
            for k in range(n + 1):
                X0[k] = X[k]
        for i in range(n):
            # neighbours (zero beyond the last node)
            if j + 1 < M:
                nb = vb[j + 1, i]
                nc = vc[j + 1, i]
            else:
                nb = 0.0
                nc = 0.0
            if j == 0:
                d2b = 2.0 * (nb - vb[j, i]) * ih2
                d2c = 2.0 * (nc - vc[j, i]) * ih2
            else:
                pb = vb[j - 1, i]
                pc = vc[j - 1, i]
                d2b = ((pb - vb[j, i]) - (vb[j, i] - nb)) * ih2
                d2c = ((pc - vc[j, i]) - (vc[j, i] - nc)) * ih2
            f_i = X[i] - X[i + 1]
            F[j * n + i] = (d2b + d2c) - w * f_i
            if want_jac:
                r = j * n + i
                coef = X[i] * (a if i == 0 else 1.0) + X[i + 1] * (b if i == n - 1 else 1.0)
                ab[n, r] = -2.0 * ih2 - w * coef
                if i > 0:
                    ab[n + 1, r - 1] = w * X[i]
                if i < n - 1:
                    ab[n - 1, r + 1] = w * X[i + 1]
                if j + 1 < M:
                    ab[0, r + n] = (2.0 if j == 0 else 1.0) * ih2
                if j > 0:
                    ab[2 * n, r - n] = ih2

    if robin:
        w = exp(2.0 * s[0])
        q = np.empty(n + 1, dtype=np.float64)
        for k in range(n + 1):
            q[k] = w * X0[k] / alpha[k]
        for i in range(n):
            F[i] -= 2.0 * (q[i] - q[i + 1]) / h
        if want_jac:
            from ._kernels_py import exponent_jacobian
            G = exponent_jacobian(n, a, b)
            for i in range(n):
                for k in range(n):
                    coef = q[i] * G[i, k] - q[i + 1] * G[i + 1, k]
                    if coef != 0.0:
                        ab[n + i - k, k] += -2.0 * coef / h
    if want_jac:
        return F, ab
    return F, None
