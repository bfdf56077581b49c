# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the kernels in ``_pykernels``."""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def damp(const double complex[:, ::1] rho, const double[::1] table):
    cdef Py_ssize_t d = rho.shape[0]
    cdef Py_ssize_t x, y
    out = np.empty((d, d), dtype=np.complex128)
    cdef double complex[:, ::1] o = out
    for x in range(d):
        for y in range(d):
            o[x, y] = rho[x, y] * table[x ^ y]
    return out


def schur_local(const double[:, :, ::1] X, const double[:, :, ::1] Z,
                const Py_ssize_t[:, ::1] rows, const Py_ssize_t[:, ::1] cols,
                const double[:, ::1] vals):
    cdef Py_ssize_t nb = X.shape[0]
    cdef Py_ssize_t m = rows.shape[0]
    cdef Py_ssize_t S = rows.shape[1]
    cdef Py_ssize_t b, i, j, s, t
    cdef double acc, vi
    out = np.zeros((nb, m, m), dtype=np.float64)
    cdef double[:, :, ::1] o = out
    for b in range(nb):
        for i in range(m):
            for j in range(i, m):
                acc = 0.0
                for s in range(S):
                    vi = vals[i, s]
                    if vi == 0.0:
                        continue
                    for t in range(S):
                        if vals[j, t] == 0.0:
                            continue
                        acc += vi * vals[j, t] * X[b, cols[i, s], rows[j, t]] * Z[b, cols[j, t], rows[i, s]]
                o[b, i, j] = acc
                o[b, j, i] = acc
    return out


def scatter_add(double[:, ::1] M, const double[:, :, ::1] local, const Py_ssize_t[:, ::1] gidx):
    cdef Py_ssize_t nb = local.shape[0]
    cdef Py_ssize_t m = local.shape[1]
    cdef Py_ssize_t b, i, j
    for b in range(nb):
        for i in range(m):
            for j in range(m):
                M[gidx[b, i], gidx[b, j]] += local[b, i, j]
    return np.asarray(M)
