# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled numerical kernels; see ``_pykernels`` for the reference versions."""

from libc.math cimport exp, log, fabs, isnan, INFINITY

import numpy as np


cpdef double logsumexp(a):
    cdef const double[::1] v = np.ascontiguousarray(a, dtype=np.float64)
    cdef Py_ssize_t i, n = v.shape[0]
    cdef double m = -INFINITY, s = 0.0
    if n == 0:
        return -INFINITY
    for i in range(n):
        if isnan(v[i]):
            return v[i]
        if v[i] > m:
            m = v[i]
    if m == -INFINITY or m == INFINITY:
        return m
    for i in range(n):
        s += exp(v[i] - m)
    return m + log(s)


def signed_logsumexp(logmag, sign):
    cdef const double[::1] lm = np.ascontiguousarray(logmag, dtype=np.float64)
    cdef const double[::1] sg = np.ascontiguousarray(sign, dtype=np.float64)
    cdef Py_ssize_t i, n = lm.shape[0]
    cdef double m = -INFINITY, pos = 0.0, neg = 0.0, e, diff
    cdef bint any_live = False
    if sg.shape[0] != n:
        raise ValueError("logmag and sign must have equal length")
    for i in range(n):
        if sg[i] != 0.0 and lm[i] > -INFINITY:
            any_live = True
            if isnan(lm[i]):
                return lm[i], 1.0
            if lm[i] > m:
                m = lm[i]
    if not any_live:
        return -INFINITY, 0.0
    if m == INFINITY:
        return m, 1.0
    for i in range(n):
        if sg[i] != 0.0 and lm[i] > -INFINITY:
            e = exp(lm[i] - m)
            if sg[i] > 0:
                pos += e
            else:
                neg += e
    diff = pos - neg
    if diff == 0.0:
        return -INFINITY, 0.0
    return m + log(fabs(diff)), (1.0 if diff > 0 else -1.0)


cpdef double compensated_sum(a):
    """Neumaier-compensated sum."""
    cdef const double[::1] v = np.ascontiguousarray(a, dtype=np.float64)
    cdef Py_ssize_t i, n = v.shape[0]
    cdef double s = 0.0, c = 0.0, t
    for i in range(n):
        t = s + v[i]
        if fabs(s) >= fabs(v[i]):
            c += (s - t) + v[i]
        else:
            c += (v[i] - t) + s
        s = t
    return s + c


def nw_sums(x, y, double x0, double h):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef const double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef Py_ssize_t i, n = xv.shape[0]
    cdef double u, k, num = 0.0, den = 0.0
    if yv.shape[0] != n:
        raise ValueError("x and y must have equal length")
    for i in range(n):
        u = (x0 - xv[i]) / h
        k = exp(-0.5 * u * u)
        num += k * yv[i]
        den += k
    return num, den
