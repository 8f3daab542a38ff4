import numpy as np
import pytest

from funlyz.bodies import Ball, Ellipsoid, regular_polygon, square
from funlyz.integration import IntegrationSpec


@pytest.fixture
def unit_square():
    return square()


@pytest.fixture
def hexagon():
    return regular_polygon(6)


@pytest.fixture
def disk():
    return Ball(2)


@pytest.fixture
def ellipse():
    return Ellipsoid([[1.7, 0.35], [0.35, 0.6]])


@pytest.fixture
def quad_spec():
    return IntegrationSpec(backend="quadrature", budget=60_000)


@pytest.fixture
def mc_spec():
    return IntegrationSpec(backend="mc", budget=200_000, seed=7)


def random_spd(rng, n, lo=0.5, hi=2.5):
    A = rng.standard_normal((n, n))
    Q, _ = np.linalg.qr(A)
    lam = rng.uniform(lo, hi, size=n)
    return (Q * lam) @ Q.T


def random_invertible(rng, n, cond=10.0):
    A = rng.standard_normal((n, n))
    U, _s, Vt = np.linalg.svd(A)
    s = np.linspace(1.0, cond**0.5, n)
    return (U * s) @ Vt
