# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Fused evaluation of the exponential-tilt sums used by the dual solver.

All sums run in index order so results are reproducible bit for bit.
"""

import numpy as np
from libc.math cimport exp, log


cdef double _shift(const double[::1] q, const double[:, ::1] D,
                   const double[::1] lam, double[::1] z) noexcept nogil:
    cdef Py_ssize_t i, l, n = D.shape[0], L = D.shape[1]
    cdef double s, m = -1e308
    for i in range(n):
        s = 0.0
        for l in range(L):
            s += D[i, l] * lam[l]
        z[i] = s
        if q[i] > 0.0 and s > m:
            m = s
    return m


def dual_terms(const double[::1] q, const double[:, ::1] D, const double[::1] lam):
    """Return ``(J_scaled, shift, grad_scaled, hess_scaled)``.

    The true objective is ``exp(shift) * J_scaled``; gradient and Hessian carry
    the same factor.
    """
    cdef Py_ssize_t i, j, k, n = D.shape[0], L = D.shape[1]
    z_arr = np.empty(n)
    grad_arr = np.zeros(L)
    hess_arr = np.zeros((L, L))
    cdef double[::1] z = z_arr
    cdef double[::1] grad = grad_arr
    cdef double[:, ::1] hess = hess_arr
    cdef double m, e, ed, J = 0.0
    with nogil:
        m = _shift(q, D, lam, z)
        for i in range(n):
            if q[i] <= 0.0:
                continue
            e = q[i] * exp(z[i] - m)
            J += e
            for j in range(L):
                ed = e * D[i, j]
                grad[j] += ed
                for k in range(j + 1):
                    hess[j, k] += ed * D[i, k]
        for j in range(L):
            for k in range(j):
                hess[k, j] = hess[j, k]
    return J, m, grad_arr, hess_arr


def log_dual(const double[::1] q, const double[:, ::1] D, const double[::1] lam):
    """``log J`` evaluated with the max-exponent shift."""
    cdef Py_ssize_t i, n = D.shape[0]
    z_arr = np.empty(n)
    cdef double[::1] z = z_arr
    cdef double m, J = 0.0
    with nogil:
        m = _shift(q, D, lam, z)
        for i in range(n):
            if q[i] > 0.0:
                J += q[i] * exp(z[i] - m)
    return m + log(J)


def tilt(const double[::1] q, const double[:, ::1] D, const double[::1] lam):
    """Normalized tilted probabilities ``q * exp(<lam, D>) / sum``."""
    cdef Py_ssize_t i, n = D.shape[0]
    z_arr = np.empty(n)
    p_arr = np.zeros(n)
    cdef double[::1] z = z_arr
    cdef double[::1] p = p_arr
    cdef double m, J = 0.0
    with nogil:
        m = _shift(q, D, lam, z)
        for i in range(n):
            if q[i] > 0.0:
                p[i] = q[i] * exp(z[i] - m)
                J += p[i]
        for i in range(n):
            p[i] /= J
    return p_arr
