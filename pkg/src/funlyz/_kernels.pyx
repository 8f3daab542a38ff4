# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the kernels in `_kernels_py`.

Same signatures, same fixed pairwise reduction tree where determinism is
contractual. All loops release the GIL so chunk-level threading in the
integration layer actually runs concurrently.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, INFINITY, isfinite

cnp.import_array()

__all__ = (
    "pairwise_sum",
    "pairwise_sum_cols",
    "legendre_1d",
    "gauge_polytope",
    "abs_dot_weighted_sum",
    "weighted_outer_sum",
)


cdef double _pairwise_tree(double* buf, Py_ssize_t m) nogil:
    # In-place fixed binary tree: pad-to-power-of-two semantics, with the
    # odd tail carried up unchanged (identical tree to the numpy twin).
    cdef Py_ssize_t half, i
    while m > 1:
        half = m // 2
        for i in range(half):
            buf[i] = buf[2 * i] + buf[2 * i + 1]
        if m % 2:
            buf[half] = buf[m - 1]
            m = half + 1
        else:
            m = half
    return buf[0] if m == 1 else 0.0


def pairwise_sum(a):
    """Sum a 1-D float64 array over the fixed pairwise binary tree."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] buf = np.array(
        a, dtype=np.float64, copy=True, order="C"
    )
    cdef Py_ssize_t m = buf.shape[0]
    if m == 0:
        return 0.0
    cdef double out
    with nogil:
        out = _pairwise_tree(&buf[0], m)
    return out


def pairwise_sum_cols(a):
    """Column sums of a 2-D float64 array over the same fixed tree."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] buf = np.array(
        a, dtype=np.float64, copy=True, order="F"
    )
    cdef Py_ssize_t m = buf.shape[0]
    cdef Py_ssize_t k = buf.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(k, dtype=np.float64)
    if m == 0:
        return out
    cdef Py_ssize_t j
    with nogil:
        for j in range(k):
            out[j] = _pairwise_tree(&buf[0, 0] + j * m, m)
    return out


def legendre_1d(x, f, s):
    """Discrete Legendre transform of one axis: max_i (s_j * x_i - f_i)."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] fv = np.ascontiguousarray(f, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] sv = np.ascontiguousarray(s, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0]
    cdef Py_ssize_t ns = sv.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] hx = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] hf = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(ns, dtype=np.float64)
    cdef Py_ssize_t top = 0, i, j, k
    cdef double xi, fi, sj
    with nogil:
        for i in range(n):
            xi = xv[i]
            fi = fv[i]
            if not isfinite(fi):
                continue
            while top >= 2 and (hf[top - 1] - hf[top - 2]) * (xi - hx[top - 1]) >= (
                fi - hf[top - 1]
            ) * (hx[top - 1] - hx[top - 2]):
                top -= 1
            hx[top] = xi
            hf[top] = fi
            top += 1
        if top == 0:
            for j in range(ns):
                out[j] = -INFINITY
        else:
            k = 0
            for j in range(ns):
                sj = sv[j]
                while k < top - 1 and (hf[k + 1] - hf[k]) <= sj * (hx[k + 1] - hx[k]):
                    k += 1
                out[j] = sj * hx[k] - hf[k]
    return out


def gauge_polytope(points, slopes, double tie_tol):
    """Polytope gauge max_i <g_i, x> with facet index and smoothness mask."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] pts = np.ascontiguousarray(points, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] slp = np.ascontiguousarray(slopes, dtype=np.float64)
    cdef Py_ssize_t m = pts.shape[0]
    cdef Py_ssize_t nd = pts.shape[1]
    cdef Py_ssize_t k = slp.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] vals = np.empty(m, dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] idx = np.empty(m, dtype=np.int64)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] ok = np.empty(m, dtype=np.uint8)
    cdef Py_ssize_t i, j, d, best
    cdef double dot, top, second, scale
    with nogil:
        for i in range(m):
            top = -INFINITY
            second = -INFINITY
            best = 0
            for j in range(k):
                dot = 0.0
                for d in range(nd):
                    dot += pts[i, d] * slp[j, d]
                if dot > top:
                    second = top
                    top = dot
                    best = j
                elif dot > second:
                    second = dot
            vals[i] = top
            idx[i] = best
            scale = fabs(top)
            if scale < 1e-300:
                scale = 1e-300
            ok[i] = 1 if (top - second) > tie_tol * scale else 0
    return vals, idx, ok.view(np.bool_)


def abs_dot_weighted_sum(y, w, u):
    """Accumulate sum_i w_i * |<y_i, u_j>| for every direction u_j."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] uv = np.ascontiguousarray(u, dtype=np.float64)
    cdef Py_ssize_t m = yv.shape[0]
    cdef Py_ssize_t nd = yv.shape[1]
    cdef Py_ssize_t k = uv.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(k, dtype=np.float64)
    cdef Py_ssize_t i, j, d
    cdef double dot, wi
    with nogil:
        for i in range(m):
            wi = wv[i]
            for j in range(k):
                dot = 0.0
                for d in range(nd):
                    dot += yv[i, d] * uv[j, d]
                out[j] += wi * fabs(dot)
    return out


def weighted_outer_sum(y, w):
    """Accumulate the weighted second-moment matrix sum_i w_i y_i y_i^T."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef Py_ssize_t m = yv.shape[0]
    cdef Py_ssize_t nd = yv.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.zeros((nd, nd), dtype=np.float64)
    cdef Py_ssize_t i, a, b
    cdef double wi
    with nogil:
        for i in range(m):
            wi = wv[i]
            for a in range(nd):
                for b in range(nd):
                    out[a, b] += wi * yv[i, a] * yv[i, b]
    return out
