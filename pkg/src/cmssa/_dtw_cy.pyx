# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled banded DTW kernel; see _dtw_py for the contract it mirrors.

The dynamic program and backtracking run without the GIL, so pairwise
similarity matrices can be built with real thread parallelism.
"""

import numpy as np

from libc.math cimport INFINITY, sqrt


cdef inline double _cell(
    double[::1] acc,
    Py_ssize_t[::1] starts,
    Py_ssize_t[::1] lo,
    Py_ssize_t[::1] hi,
    Py_ssize_t i,
    Py_ssize_t j,
) noexcept nogil:
    if i < 0 or j < 0:
        return INFINITY
    if j < lo[i] or j > hi[i]:
        return INFINITY
    return acc[starts[i] + (j - lo[i])]


def dtw_banded(double[:, ::1] a, double[:, ::1] b, Py_ssize_t[::1] lo, Py_ssize_t[::1] hi):
    """Windowed DTW over float64 (n, d) and (m, d) arrays.

    Returns (cost, path) exactly like the pure-Python kernel, including
    the diagonal-then-vertical tie preference during backtracking.
    """
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t m = b.shape[0]
    cdef Py_ssize_t d = a.shape[1]
    cdef Py_ssize_t i, j, t, length

    starts_arr = np.zeros(n + 1, dtype=np.intp)
    cdef Py_ssize_t[::1] starts = starts_arr
    for i in range(n):
        starts[i + 1] = starts[i] + (hi[i] - lo[i] + 1)

    acc_arr = np.empty(starts_arr[n], dtype=np.float64)
    cdef double[::1] acc = acc_arr
    path_arr = np.empty((n + m, 2), dtype=np.intp)
    cdef Py_ssize_t[:, ::1] path = path_arr

    cdef double local, best, v, dx, diag, up, left
    cdef double total

    with nogil:
        for i in range(n):
            for j in range(lo[i], hi[i] + 1):
                local = 0.0
                for t in range(d):
                    dx = a[i, t] - b[j, t]
                    local += dx * dx
                local = sqrt(local)
                if i == 0 and j == 0:
                    acc[0] = local
                    continue
                best = _cell(acc, starts, lo, hi, i - 1, j - 1)
                v = _cell(acc, starts, lo, hi, i - 1, j)
                if v < best:
                    best = v
                v = _cell(acc, starts, lo, hi, i, j - 1)
                if v < best:
                    best = v
                acc[starts[i] + (j - lo[i])] = local + best

        total = acc[starts[n - 1] + (m - 1 - lo[n - 1])]

        i = n - 1
        j = m - 1
        length = 0
        path[length, 0] = i
        path[length, 1] = j
        length += 1
        while i > 0 or j > 0:
            diag = _cell(acc, starts, lo, hi, i - 1, j - 1)
            up = _cell(acc, starts, lo, hi, i - 1, j)
            left = _cell(acc, starts, lo, hi, i, j - 1)
            if diag <= up and diag <= left:
                i -= 1
                j -= 1
            elif up <= left:
                i -= 1
            else:
                j -= 1
            path[length, 0] = i
            path[length, 1] = j
            length += 1

    return float(total), path_arr[:length][::-1].copy()
