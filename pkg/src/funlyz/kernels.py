"""Kernel backend selection.

Prefers the compiled extension; falls back to the pure numpy twins when the
extension was not built or when FUNLYZ_PURE_PYTHON=1 is set. The active
backend name is exposed as `KERNELS_BACKEND` ("cython" or "python").
"""

import os

from . import _kernels_py

if os.environ.get("FUNLYZ_PURE_PYTHON") == "1":
    _impl = _kernels_py
    KERNELS_BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        KERNELS_BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        KERNELS_BACKEND = "python"

pairwise_sum = _impl.pairwise_sum
pairwise_sum_cols = _impl.pairwise_sum_cols
legendre_1d = _impl.legendre_1d
gauge_polytope = _impl.gauge_polytope
abs_dot_weighted_sum = _impl.abs_dot_weighted_sum
weighted_outer_sum = _impl.weighted_outer_sum

__all__ = (
    "KERNELS_BACKEND",
    "pairwise_sum",
    "pairwise_sum_cols",
    "legendre_1d",
    "gauge_polytope",
    "abs_dot_weighted_sum",
    "weighted_outer_sum",
)
