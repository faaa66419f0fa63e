# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops. Same contracts as ``_kernels_py``."""

from libc.math cimport INFINITY


def count_columns_direct(Py_ssize_t k, lower, upper):
    # Big-integer additions dominate; builtin sum over a list slice runs them
    # in C with less per-element overhead than an explicit accumulator loop.
    cdef list prev = [1] + [0] * k
    cdef list cols = [prev]
    cdef list col
    cdef Py_ssize_t i, kp, lo_t, L, U
    for i in range(len(lower)):
        L = lower[i]
        U = upper[i]
        col = [0] * (k + 1)
        for kp in range(L, k + 1):
            lo_t = kp - U
            if lo_t < 0:
                lo_t = 0
            col[kp] = sum(prev[lo_t:kp - L + 1])
        cols.append(col)
        prev = col
    return cols


def hit_and_run(double[::1] z, const double[:, ::1] directions, const double[::1] uniforms,
                const double[::1] lo, const double[::1] hi, Py_ssize_t thin, double[:, ::1] out):
    cdef Py_ssize_t n = directions.shape[0]
    cdef Py_ssize_t ell = z.shape[0]
    cdef Py_ssize_t s, j, row = 0
    cdef double a, t1, t2, tmin, tmax, t
    for s in range(n):
        tmin = -INFINITY
        tmax = INFINITY
        for j in range(ell):
            a = directions[s, j]
            if a > 0:
                t1 = (lo[j] - z[j]) / a
                t2 = (hi[j] - z[j]) / a
            elif a < 0:
                t1 = (hi[j] - z[j]) / a
                t2 = (lo[j] - z[j]) / a
            else:
                continue
            if t1 > tmin:
                tmin = t1
            if t2 < tmax:
                tmax = t2
        if tmax > tmin:
            t = tmin + uniforms[s] * (tmax - tmin)
            for j in range(ell):
                z[j] = z[j] + t * directions[s, j]
        if thin > 0 and (s + 1) % thin == 0:
            for j in range(ell):
                out[row, j] = z[j]
            row += 1
