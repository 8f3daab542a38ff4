"""Pure numpy implementations of the hot kernels.

These are the reference implementations; `funlyz._kernels` (Cython) provides
drop-in compiled twins selected at import time by `funlyz.kernels`. Both
sides keep the same reduction trees where determinism is contractual:
`pairwise_sum` / `pairwise_sum_cols` reduce over the identical fixed binary
tree (pad to a power of two, add adjacent pairs), so a given backend returns
bit-identical results regardless of how callers split the work.
"""

import numpy as np

__all__ = (
    "pairwise_sum",
    "pairwise_sum_cols",
    "legendre_1d",
    "gauge_polytope",
    "abs_dot_weighted_sum",
    "weighted_outer_sum",
)

# Sub-chunk row count for the matmul-based kernels; bounds temporaries.
_BLOCK = 8192


def pairwise_sum(a):
    """Sum a 1-D float64 array over the fixed pairwise binary tree.

    The array is conceptually padded with zeros to the next power of two
    and adjacent pairs are added level by level. The tree depends only on
    the array length, never on the caller's threading.
    """
    a = np.ascontiguousarray(a, dtype=np.float64)
    m = a.shape[0]
    if m == 0:
        return 0.0
    while m > 1:
        half = m // 2
        left = a[: 2 * half : 2] + a[1 : 2 * half : 2]
        if m % 2:
            # Odd tail pairs with an implicit zero and moves up unchanged.
            a = np.concatenate([left, a[-1:]])
        else:
            a = left
        m = a.shape[0]
    return float(a[0])


def pairwise_sum_cols(a):
    """Column sums of a 2-D float64 array over the same fixed tree."""
    a = np.ascontiguousarray(a, dtype=np.float64)
    m = a.shape[0]
    if m == 0:
        return np.zeros(a.shape[1])
    while m > 1:
        half = m // 2
        left = a[: 2 * half : 2] + a[1 : 2 * half : 2]
        if m % 2:
            a = np.concatenate([left, a[-1:]])
        else:
            a = left
        m = a.shape[0]
    return a[0].copy()


def legendre_1d(x, f, s):
    """Discrete Legendre transform of one axis: max_i (s_j * x_i - f_i).

    Linear-time lower-hull walk. `x` and `s` must be strictly increasing;
    non-finite `f` entries are treated as +infinity (outside the domain).
    Returns -inf everywhere when no entry is finite.
    """
    x = np.asarray(x, dtype=np.float64)
    f = np.asarray(f, dtype=np.float64)
    s = np.asarray(s, dtype=np.float64)
    hx, hf = [], []
    for xi, fi in zip(x, f):
        if not np.isfinite(fi):
            continue
        while len(hx) >= 2 and (hf[-1] - hf[-2]) * (xi - hx[-1]) >= (
            fi - hf[-1]
        ) * (hx[-1] - hx[-2]):
            hx.pop()
            hf.pop()
        hx.append(xi)
        hf.append(fi)
    out = np.empty(s.shape[0], dtype=np.float64)
    if not hx:
        out.fill(-np.inf)
        return out
    k = 0
    last = len(hx) - 1
    for j in range(s.shape[0]):
        sj = s[j]
        while k < last and (hf[k + 1] - hf[k]) <= sj * (hx[k + 1] - hx[k]):
            k += 1
        out[j] = sj * hx[k] - hf[k]
    return out


def gauge_polytope(points, slopes, tie_tol):
    """Evaluate a polytope gauge max_i <g_i, x> on a batch of points.

    `slopes` holds the rows g_i = nu_i / h_i. Returns (values, facet index,
    smooth mask); the mask is False where the top two facets agree within
    `tie_tol` relatively, i.e. the point sits on a facet-cone boundary and
    the gauge is not differentiable there.
    """
    points = np.asarray(points, dtype=np.float64)
    slopes = np.asarray(slopes, dtype=np.float64)
    dots = points @ slopes.T
    order = np.argsort(dots, axis=1)
    idx = order[:, -1]
    top = dots[np.arange(dots.shape[0]), idx]
    if slopes.shape[0] > 1:
        second = dots[np.arange(dots.shape[0]), order[:, -2]]
    else:
        second = np.full_like(top, -np.inf)
    scale = np.maximum(np.abs(top), 1e-300)
    ok = (top - second) > tie_tol * scale
    return top, idx.astype(np.int64), ok


def abs_dot_weighted_sum(y, w, u):
    """Accumulate sum_i w_i * |<y_i, u_j>| for every direction u_j."""
    y = np.asarray(y, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    out = np.zeros(u.shape[0], dtype=np.float64)
    for start in range(0, y.shape[0], _BLOCK):
        block = slice(start, start + _BLOCK)
        out += w[block] @ np.abs(y[block] @ u.T)
    return out


def weighted_outer_sum(y, w):
    """Accumulate the weighted second-moment matrix sum_i w_i y_i y_i^T."""
    y = np.asarray(y, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    return np.einsum("i,ij,ik->jk", w, y, y)
