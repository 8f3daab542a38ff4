"""Kernel twins: the compiled and numpy implementations must agree — bit
for bit where the reduction tree is contractual, to machine rounding where
BLAS is involved."""

import math

import numpy as np
import pytest

from funlyz import _kernels_py

try:
    from funlyz import _kernels

    HAVE_COMPILED = True
except ImportError:
    HAVE_COMPILED = False

needs_compiled = pytest.mark.skipif(not HAVE_COMPILED, reason="extension not built")

rng = np.random.default_rng(42)


def test_pairwise_sum_matches_fsum():
    a = rng.standard_normal(12345) * 1e6
    assert math.isclose(_kernels_py.pairwise_sum(a), math.fsum(a), rel_tol=1e-12)


def test_pairwise_sum_edge_cases():
    assert _kernels_py.pairwise_sum(np.array([])) == 0.0
    assert _kernels_py.pairwise_sum(np.array([3.5])) == 3.5
    a = np.array([1e16, 1.0, -1e16, 1.0])
    assert _kernels_py.pairwise_sum(a) == (1e16 + 1.0) + (-1e16 + 1.0)


def test_pairwise_sum_cols_matches_rows():
    A = rng.standard_normal((1031, 5))
    cols = _kernels_py.pairwise_sum_cols(A)
    for j in range(5):
        assert cols[j] == _kernels_py.pairwise_sum(A[:, j])


@needs_compiled
def test_pairwise_twins_bit_identical():
    for m in (0, 1, 2, 3, 100, 65536, 65537, 131071):
        a = rng.standard_normal(m)
        assert _kernels.pairwise_sum(a) == _kernels_py.pairwise_sum(a)
    A = rng.standard_normal((777, 9))
    assert np.array_equal(_kernels.pairwise_sum_cols(A), _kernels_py.pairwise_sum_cols(A))


def test_legendre_1d_quadratic():
    x = np.linspace(-8, 8, 257)
    s = np.linspace(-6, 6, 101)
    out = _kernels_py.legendre_1d(x, x**2, s)
    assert np.max(np.abs(out - s**2 / 4)) < 1e-3


def test_legendre_1d_skips_infinite_entries():
    x = np.linspace(-2, 2, 41)
    f = np.where(np.abs(x) <= 1, 0.0, np.inf)  # indicator of [-1, 1]
    s = np.linspace(-3, 3, 21)
    out = _kernels_py.legendre_1d(x, f, s)
    assert np.allclose(out, np.abs(s))  # conjugate of the indicator


def test_legendre_1d_improper_input():
    x = np.linspace(-1, 1, 5)
    out = _kernels_py.legendre_1d(x, np.full(5, np.inf), np.array([0.0]))
    assert np.all(np.isneginf(out))


@needs_compiled
def test_legendre_twins_bit_identical():
    x = np.linspace(-8, 8, 257)
    f = 0.7 * x**2 + 0.1 * np.abs(x) ** 3
    s = np.linspace(-20, 20, 257)
    assert np.array_equal(
        _kernels.legendre_1d(x, f, s), _kernels_py.legendre_1d(x, f, s)
    )


def test_gauge_polytope_values_and_ties():
    # Unit square: slopes are the four facet rows nu_i / h_i.
    slopes = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
    pts = np.array([[0.5, -1.0], [2.0, 0.0], [1.0, 1.0], [0.3, 0.3]])
    vals, idx, ok = _kernels_py.gauge_polytope(pts, slopes, 1e-9)
    assert np.allclose(vals, [1.0, 2.0, 1.0, 0.3])
    assert idx[1] == 0
    assert ok[0] and ok[1]
    assert not ok[2] and not ok[3]  # diagonal points tie two facets


@needs_compiled
def test_gauge_twins_agree():
    P = rng.standard_normal((4096, 3))
    S = rng.standard_normal((7, 3))
    v1, i1, o1 = _kernels.gauge_polytope(P, S, 1e-9)
    v2, i2, o2 = _kernels_py.gauge_polytope(P, S, 1e-9)
    assert np.allclose(v1, v2, rtol=1e-13, atol=0)
    assert np.array_equal(i1, i2)
    assert np.array_equal(o1, o2)


@needs_compiled
def test_absdot_and_outer_twins_agree():
    Y = rng.standard_normal((20000, 2))
    w = rng.random(20000)
    U = rng.standard_normal((65, 2))
    assert np.allclose(
        _kernels.abs_dot_weighted_sum(Y, w, U),
        _kernels_py.abs_dot_weighted_sum(Y, w, U),
        rtol=1e-12,
    )
    assert np.allclose(
        _kernels.weighted_outer_sum(Y, w), _kernels_py.weighted_outer_sum(Y, w), rtol=1e-12
    )


def test_absdot_oracle():
    Y = np.array([[1.0, 0.0], [0.0, 2.0]])
    w = np.array([3.0, 0.5])
    U = np.array([[1.0, 0.0], [0.0, 1.0]])
    out = _kernels_py.abs_dot_weighted_sum(Y, w, U)
    assert np.allclose(out, [3.0, 1.0])


def test_weighted_outer_oracle():
    Y = np.array([[1.0, 2.0], [3.0, -1.0]])
    w = np.array([2.0, 1.0])
    expected = 2.0 * np.outer(Y[0], Y[0]) + np.outer(Y[1], Y[1])
    assert np.allclose(_kernels_py.weighted_outer_sum(Y, w), expected)
