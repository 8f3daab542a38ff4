"""Convex bodies: duality identities, volumes, the quadratic surface-area
body against hand-computed oracles, projection bodies."""

import math

import numpy as np
import pytest

from funlyz.bodies import (
    Ball,
    Ellipsoid,
    Polytope,
    QuadraticForm,
    cube,
    lyz_body_matrix,
    projection_body,
    regular_polygon,
    square,
)
from funlyz.errors import DegenerateError, FunlyzError

from conftest import random_invertible

rng = np.random.default_rng(1)


def test_square_basics(unit_square):
    assert unit_square.volume() == pytest.approx(4.0)
    assert unit_square.gauge([0.5, -1.0]) == pytest.approx(1.0)
    assert unit_square.support([1.0, 1.0]) == pytest.approx(2.0)
    assert unit_square.radial([2.0, 0.0]) == pytest.approx(0.5)


def test_minkowski_closure(unit_square, hexagon):
    for body in (unit_square, hexagon, cube()):
        closure = body.normals.T @ body.areas
        assert np.linalg.norm(closure) < 1e-9 * np.sum(body.areas)


def test_volume_facet_identity(hexagon):
    # (1/n) sum a_i h_i against the shoelace value for the regular hexagon.
    assert hexagon.volume() == pytest.approx(3.0 * math.sqrt(3.0) / 2.0, rel=1e-12)


def test_cube_volume():
    assert cube(1.0).volume() == pytest.approx(8.0, rel=1e-9)


def test_gauge_radial_duality(unit_square, hexagon, ellipse):
    for body in (unit_square, hexagon, ellipse):
        for _ in range(50):
            u = rng.standard_normal(2)
            u /= np.linalg.norm(u)
            assert body.radial(u) == pytest.approx(1.0 / body.gauge(u), rel=1e-9)


def test_gauge_is_support_of_polar(unit_square, hexagon, ellipse):
    for body in (unit_square, hexagon, ellipse):
        polar = body.polar()
        X = rng.standard_normal((100, 2))
        assert np.allclose(body.gauge_many(X), polar.support_many(X), rtol=1e-9)


def test_polar_square_is_cross_polytope(unit_square):
    polar = unit_square.polar()
    expected = {(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)}
    got = {tuple(np.round(v, 9)) for v in polar.vertices}
    assert got == expected


def test_polar_involution(hexagon):
    back = hexagon.polar().polar()
    U = rng.standard_normal((60, 2))
    assert np.allclose(back.support_many(U), hexagon.support_many(U), rtol=1e-9)


def test_ellipsoid_gauge_and_polar():
    e = Ellipsoid(np.diag([4.0, 1.0]))
    assert e.gauge([1.0, 0.0]) == pytest.approx(2.0)
    assert e.polar().Q == pytest.approx(np.diag([0.25, 1.0]))
    assert e.volume() == pytest.approx(math.pi / 2.0)


def test_ball_polar_and_volume():
    b = Ball(3, 2.0)
    assert b.polar().radius == pytest.approx(0.5)
    assert b.volume() == pytest.approx(4.0 / 3.0 * math.pi * 8.0)
    u = np.array([0.0, 1.0, 0.0])
    assert b.radial(u) == pytest.approx(2.0)


def test_from_halfspaces_recomputes_measures(unit_square):
    rebuilt = Polytope.from_halfspaces(unit_square.normals, unit_square.supports)
    assert rebuilt.volume() == pytest.approx(4.0, rel=1e-12)
    assert sorted(rebuilt.areas.tolist()) == pytest.approx([2.0] * 4)


def test_from_halfspaces_drops_redundant():
    normals = [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0], [1.0, 0.0]]
    supports = [1.0, 1.0, 1.0, 1.0, 5.0]  # last halfspace never binds
    body = Polytope.from_halfspaces(normals, supports)
    assert body.volume() == pytest.approx(4.0, rel=1e-12)
    assert len(body.supports) == 4


def test_origin_must_be_interior():
    with pytest.raises(FunlyzError):
        Polytope.from_vertices([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])


def test_lyz_body_square_is_disk(unit_square):
    # Facet sum by hand: (1/4) * sum of (2/1) nu nu^T over 4 facets = I.
    form = lyz_body_matrix(unit_square)
    assert np.allclose(form.A, np.eye(2), atol=1e-12)


def test_lyz_body_ball_fixed_point():
    for body in (Ball(2), Ball(3)):
        form = lyz_body_matrix(body)
        assert np.allclose(form.A, body.Q, atol=1e-6)


def test_lyz_body_ellipsoid_fixed_point(ellipse):
    form = lyz_body_matrix(ellipse)
    assert np.allclose(form.A, ellipse.Q, rtol=1e-6, atol=1e-8)


def test_lyz_body_ellipsoid_3d_fixed_point():
    Q = np.diag([2.0, 1.0, 0.5])
    form = lyz_body_matrix(Ellipsoid(Q))
    assert np.allclose(form.A, Q, rtol=2e-5, atol=1e-6)


def test_lyz_body_gl_equivariance_on_ellipsoids():
    # Q_{TK} = T^-t Q_K T^-1 for the ellipsoid family.
    Q = np.array([[1.5, 0.2], [0.2, 0.9]])
    K = Ellipsoid(Q)
    for _ in range(5):
        T = random_invertible(rng, 2)
        lhs = lyz_body_matrix(K.linear_image(T)).A
        Tinv = np.linalg.inv(T)
        rhs = Tinv.T @ lyz_body_matrix(K).A @ Tinv
        assert np.allclose(lhs, rhs, rtol=1e-6, atol=1e-8)


def test_lyz_body_hexagon_matches_isotropy(hexagon):
    # Regular polygons have isotropic facet data: the body is a disk.
    form = lyz_body_matrix(hexagon)
    assert np.allclose(form.A, form.A[0, 0] * np.eye(2), atol=1e-12)


def test_projection_body_square(unit_square):
    z = projection_body(unit_square)
    U = rng.standard_normal((40, 2))
    expected = 2.0 * (np.abs(U[:, 0]) + np.abs(U[:, 1]))
    assert np.allclose(z.support_many(U), expected, rtol=1e-12)


def test_projection_body_even(hexagon):
    z = projection_body(hexagon)
    U = rng.standard_normal((40, 2))
    assert np.allclose(z.support_many(U), z.support_many(-U), rtol=1e-12)


def test_projection_body_ball_rotation_invariant():
    pb = projection_body(Ball(2))
    U = rng.standard_normal((20, 2))
    U /= np.linalg.norm(U, axis=1, keepdims=True)
    vals = pb.support_many(U)
    assert np.allclose(vals, 2.0, rtol=1e-12)  # omega_1 * r^(n-1) = 2


def test_quadratic_form_validation():
    with pytest.raises(FunlyzError):
        QuadraticForm([[1.0, 0.5], [0.0, 1.0]])
    with pytest.raises(DegenerateError):
        QuadraticForm([[1.0, 0.0], [0.0, -0.5]])
    q = QuadraticForm(np.eye(2))
    assert q([3.0, 4.0]) == pytest.approx(25.0)


def test_degenerate_normals_rejected():
    # A slab's normals span one direction only: the closure sum passes but
    # the surface-area form is rank-deficient.
    slab = Polytope(
        normals=[[1.0, 0.0], [-1.0, 0.0]],
        supports=[1.0, 1.0],
        areas=[1.0, 1.0],
        vertices=[[1.0, 0.0], [-1.0, 0.0]],
        facet_simplices=np.zeros((2, 2, 2)),
    )
    with pytest.raises(DegenerateError):
        lyz_body_matrix(slab)


def test_linear_image_polytope(unit_square):
    T = np.array([[2.0, 0.0], [0.0, 1.0]])
    image = unit_square.linear_image(T)
    assert image.volume() == pytest.approx(8.0, rel=1e-12)
    assert image.gauge([2.0, 0.0]) == pytest.approx(1.0)


def test_scale_polytope(unit_square):
    s = unit_square.scale(3.0)
    assert s.volume() == pytest.approx(36.0, rel=1e-12)
    assert s.gauge([3.0, 0.0]) == pytest.approx(1.0)


def test_regular_polygon_gauge(hexagon):
    # Vertex directions touch the boundary at circumradius 1.
    assert hexagon.gauge([1.0, 0.0]) == pytest.approx(1.0, rel=1e-12)
    # Edge midpoint direction touches at the inradius sqrt(3)/2.
    mid = np.array([math.cos(math.pi / 6), math.sin(math.pi / 6)])
    assert hexagon.gauge(mid) == pytest.approx(2.0 / math.sqrt(3.0), rel=1e-12)
