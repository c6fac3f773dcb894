# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot kernels; see _pure.py for the reference."""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, tanh

cnp.import_array()


cdef inline double _sigmoid(double x) nogil:
    if x >= 0.0:
        return 1.0 / (1.0 + exp(-x))
    cdef double e = exp(x)
    return e / (1.0 + e)


def lstm_gates_forward(pre, c_prev):
    cdef double[:, ::1] pre_v = np.ascontiguousarray(pre, dtype=np.float64)
    cdef double[:, ::1] cp_v = np.ascontiguousarray(c_prev, dtype=np.float64)
    cdef Py_ssize_t n = cp_v.shape[0]
    cdef Py_ssize_t h = cp_v.shape[1]

    hc_arr = np.empty((n, 2 * h), dtype=np.float64)
    i_arr = np.empty((n, h), dtype=np.float64)
    f_arr = np.empty((n, h), dtype=np.float64)
    g_arr = np.empty((n, h), dtype=np.float64)
    o_arr = np.empty((n, h), dtype=np.float64)
    tc_arr = np.empty((n, h), dtype=np.float64)

    cdef double[:, ::1] hc = hc_arr
    cdef double[:, ::1] iv = i_arr
    cdef double[:, ::1] fv = f_arr
    cdef double[:, ::1] gv = g_arr
    cdef double[:, ::1] ov = o_arr
    cdef double[:, ::1] tc = tc_arr
    cdef Py_ssize_t r, k
    cdef double ig, fg, gg, og, c

    with nogil:
        for r in range(n):
            for k in range(h):
                ig = _sigmoid(pre_v[r, k])
                fg = _sigmoid(pre_v[r, h + k])
                gg = tanh(pre_v[r, 2 * h + k])
                og = _sigmoid(pre_v[r, 3 * h + k])
                c = fg * cp_v[r, k] + ig * gg
                iv[r, k] = ig
                fv[r, k] = fg
                gv[r, k] = gg
                ov[r, k] = og
                tc[r, k] = tanh(c)
                hc[r, k] = og * tc[r, k]
                hc[r, h + k] = c
    return hc_arr, (i_arr, f_arr, g_arr, o_arr, tc_arr)


def lstm_gates_backward(d_hc, cache, c_prev):
    i_arr, f_arr, g_arr, o_arr, tc_arr = cache
    cdef double[:, ::1] dhc = np.ascontiguousarray(d_hc, dtype=np.float64)
    cdef double[:, ::1] cp_v = np.ascontiguousarray(c_prev, dtype=np.float64)
    cdef double[:, ::1] iv = i_arr
    cdef double[:, ::1] fv = f_arr
    cdef double[:, ::1] gv = g_arr
    cdef double[:, ::1] ov = o_arr
    cdef double[:, ::1] tc = tc_arr
    cdef Py_ssize_t n = cp_v.shape[0]
    cdef Py_ssize_t h = cp_v.shape[1]

    d_pre_arr = np.empty((n, 4 * h), dtype=np.float64)
    d_cp_arr = np.empty((n, h), dtype=np.float64)
    cdef double[:, ::1] dpre = d_pre_arr
    cdef double[:, ::1] dcp = d_cp_arr
    cdef Py_ssize_t r, k
    cdef double dh, dc

    with nogil:
        for r in range(n):
            for k in range(h):
                dh = dhc[r, k]
                dc = dhc[r, h + k] + dh * ov[r, k] * (1.0 - tc[r, k] * tc[r, k])
                dpre[r, k] = dc * gv[r, k] * iv[r, k] * (1.0 - iv[r, k])
                dpre[r, h + k] = dc * cp_v[r, k] * fv[r, k] * (1.0 - fv[r, k])
                dpre[r, 2 * h + k] = dc * iv[r, k] * (1.0 - gv[r, k] * gv[r, k])
                dpre[r, 3 * h + k] = dh * tc[r, k] * ov[r, k] * (1.0 - ov[r, k])
                dcp[r, k] = dc * fv[r, k]
    return d_pre_arr, d_cp_arr


def edit_distance(a, b):
    cdef cnp.int64_t[::1] av = np.ascontiguousarray(a, dtype=np.int64)
    cdef cnp.int64_t[::1] bv = np.ascontiguousarray(b, dtype=np.int64)
    cdef Py_ssize_t la = av.shape[0]
    cdef Py_ssize_t lb = bv.shape[0]
    if la == 0:
        return lb
    if lb == 0:
        return la

    cdef cnp.int64_t[::1] prev = np.arange(lb + 1, dtype=np.int64)
    cdef cnp.int64_t[::1] cur = np.empty(lb + 1, dtype=np.int64)
    cdef Py_ssize_t ia, ib
    cdef cnp.int64_t sub, best, ca

    with nogil:
        for ia in range(1, la + 1):
            cur[0] = ia
            ca = av[ia - 1]
            for ib in range(1, lb + 1):
                sub = prev[ib - 1] + (0 if ca == bv[ib - 1] else 1)
                best = sub
                if prev[ib] + 1 < best:
                    best = prev[ib] + 1
                if cur[ib - 1] + 1 < best:
                    best = cur[ib - 1] + 1
                cur[ib] = best
            prev[:] = cur
    return int(prev[lb])
