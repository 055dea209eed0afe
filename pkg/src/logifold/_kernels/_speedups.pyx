# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled entropy kernels: explicit zero-aware loops over float64 arrays.

Mirrors the NumPy reference backend in logifold._kernels.reference; the two
are interchangeable and checked against each other in the test suite.
"""

from libc.math cimport log, INFINITY

import numpy as np

BACKEND = "compiled"


def row_entropy_nats(p):
    cdef double[:, ::1] P = np.ascontiguousarray(p, dtype=np.float64)
    cdef Py_ssize_t n = P.shape[0], t = P.shape[1]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] O = out
    cdef Py_ssize_t i, a
    cdef double acc, v
    for i in range(n):
        acc = 0.0
        for a in range(t):
            v = P[i, a]
            if v > 0.0:
                acc -= v * log(v)
        O[i] = acc
    return out


def row_cross_entropy_nats(y, g):
    cdef double[:, ::1] Y = np.ascontiguousarray(y, dtype=np.float64)
    cdef double[:, ::1] G = np.ascontiguousarray(g, dtype=np.float64)
    cdef Py_ssize_t n = Y.shape[0], t = Y.shape[1]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] O = out
    cdef Py_ssize_t i, a
    cdef double acc, ya, ga
    cdef bint bad
    for i in range(n):
        acc = 0.0
        bad = False
        for a in range(t):
            ya = Y[i, a]
            if ya > 0.0:
                ga = G[i, a]
                if ga <= 0.0:
                    bad = True
                    break
                acc -= ya * log(ga)
        O[i] = INFINITY if bad else acc
    return out


def pair_cross_total_nats(p):
    cdef double[:, ::1] P = np.ascontiguousarray(p, dtype=np.float64)
    cdef Py_ssize_t k = P.shape[0], t = P.shape[1]
    cdef Py_ssize_t l, r, a
    cdef double acc = 0.0, s, ls
    cdef bint haspos, haszero
    # column scan: mixed zero/positive forces +inf, all-zero contributes 0
    for a in range(t):
        haspos = False
        haszero = False
        for l in range(k):
            if P[l, a] > 0.0:
                haspos = True
            else:
                haszero = True
        if haspos and haszero:
            return INFINITY
        if haspos:
            s = 0.0
            ls = 0.0
            for l in range(k):
                s += P[l, a]
                ls += log(P[l, a])
            acc -= s * ls
    return acc


def batch_pair_cross_total_nats(p):
    cdef double[:, :, ::1] P = np.ascontiguousarray(p, dtype=np.float64)
    cdef Py_ssize_t k = P.shape[0], n = P.shape[1], t = P.shape[2]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] O = out
    cdef Py_ssize_t i, l, a
    cdef double acc, s, ls
    cdef bint haspos, haszero, bad
    for i in range(n):
        acc = 0.0
        bad = False
        for a in range(t):
            haspos = False
            haszero = False
            for l in range(k):
                if P[l, i, a] > 0.0:
                    haspos = True
                else:
                    haszero = True
            if haspos and haszero:
                bad = True
                break
            if haspos:
                s = 0.0
                ls = 0.0
                for l in range(k):
                    s += P[l, i, a]
                    ls += log(P[l, i, a])
                acc -= s * ls
        O[i] = INFINITY if bad else acc
    return out
