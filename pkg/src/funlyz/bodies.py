"""Convex bodies with the origin interior, at desk scale (n = 2, 3).

Two concrete families: polytopes (facet normals, support numbers, facet
measures, plus vertices) and ellipsoids {x : x^T Q x <= 1}. Between them
every classical functional used here is exact or spectrally accurate:
gauge/support/radial/polar duality, volume, the quadratic surface-area
(second-moment) body, and the projection body.
"""

import math

import numpy as np
from scipy.spatial import ConvexHull

from .constants import ball_volume
from .errors import DegenerateError, DimensionMismatchError, FunlyzError
from .kernels import gauge_polytope
from .sphere import circle_grid, fibonacci_sphere

# Relative tolerance for the Minkowski closure sum(a_i nu_i) = 0 and the
# facet-decomposition volume identity.
_CLOSURE_TOL = 1e-9

# Angular tolerance below which a point counts as lying on a facet-cone
# boundary (gauge not differentiable there).
GAUGE_TIE_TOL = 1e-9


def _readonly(a):
    a = np.array(a, dtype=np.float64)
    a.setflags(write=False)
    return a


def _check_dim(x, n):
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != n:
        raise DimensionMismatchError(f"expected dimension {n}, got {x.shape[-1]}")
    return x


class ConvexBody:
    """Common interface: gauge, support, radial, polar, volume, linear image.

    All values are immutable after construction.
    """

    dim: int

    def gauge(self, x) -> float:
        return float(self.gauge_many(_check_dim(x, self.dim)[None, :])[0])

    def gauge_many(self, X) -> np.ndarray:
        raise NotImplementedError

    def gauge_grad_many(self, X):
        """Gauge values, gradients, and a smoothness mask for a batch.

        Where the mask is False the returned gradient is a deterministic
        subgradient choice; Monte Carlo callers resample those points.
        """
        raise NotImplementedError

    def support(self, u) -> float:
        return float(self.support_many(_check_dim(u, self.dim)[None, :])[0])

    def support_many(self, U) -> np.ndarray:
        raise NotImplementedError

    def radial(self, u) -> float:
        """rho_K(u) = max{t >= 0 : t u in K} = 1 / gauge(u)."""
        u = _check_dim(u, self.dim)
        g = self.gauge(u)
        if g == 0.0:
            raise FunlyzError("radial function undefined in the zero direction")
        return 1.0 / g

    def volume(self) -> float:
        raise NotImplementedError

    def polar(self) -> "ConvexBody":
        raise NotImplementedError

    def linear_image(self, T) -> "ConvexBody":
        """The body T K."""
        raise NotImplementedError

    def scale(self, c: float) -> "ConvexBody":
        return self.linear_image(np.eye(self.dim) * float(c))


class Polytope(ConvexBody):
    """Polytope through facet data (unit outer normals nu_i, support numbers
    h_i > 0, facet measures a_i > 0) plus vertices.

    In 3-D facets are stored per hull simplex, so coplanar facets may appear
    as several triangles; every functional used here is additive over that
    split. Build with `from_vertices` or `from_halfspaces`.
    """

    def __init__(self, normals, supports, areas, vertices, facet_simplices):
        self.dim = int(np.asarray(normals).shape[1])
        n = self.dim
        if n not in (2, 3):
            raise FunlyzError("polytopes supported for n in {2, 3}")
        self.normals = _readonly(normals)
        self.supports = _readonly(supports)
        self.areas = _readonly(areas)
        self.vertices = _readonly(vertices)
        self.facet_simplices = _readonly(facet_simplices)
        if np.any(self.supports <= 0):
            raise FunlyzError("origin must be interior: all support numbers > 0")
        norms = np.linalg.norm(self.normals, axis=1)
        if np.max(np.abs(norms - 1.0)) > 1e-9:
            raise FunlyzError("facet normals must be unit vectors")
        closure = self.normals.T @ self.areas
        if np.linalg.norm(closure) > _CLOSURE_TOL * np.sum(self.areas):
            raise FunlyzError("facet data violates the Minkowski closure sum(a_i nu_i) = 0")
        self._gauge_slopes = _readonly(self.normals / self.supports[:, None])
        vol = float(np.dot(self.areas, self.supports)) / n
        if vol <= 0:
            raise DegenerateError("polytope has nonpositive volume")
        self._volume = vol

    @classmethod
    def from_vertices(cls, points) -> "Polytope":
        points = np.asarray(points, dtype=np.float64)
        hull = ConvexHull(points)
        normals = hull.equations[:, :-1]
        supports = -hull.equations[:, -1]
        if np.any(supports <= 0):
            raise FunlyzError("origin must be interior to the polytope")
        simplices = hull.points[hull.simplices]
        if points.shape[1] == 2:
            edges = simplices[:, 1] - simplices[:, 0]
            areas = np.linalg.norm(edges, axis=1)
            vertices = hull.points[hull.vertices]
        else:
            cross = np.cross(
                simplices[:, 1] - simplices[:, 0], simplices[:, 2] - simplices[:, 0]
            )
            areas = 0.5 * np.linalg.norm(cross, axis=1)
            vertices = hull.points[hull.vertices]
        poly = cls(normals, supports, areas, vertices, simplices)
        if abs(poly.volume() - hull.volume) > _CLOSURE_TOL * max(1.0, hull.volume):
            raise FunlyzError("facet-decomposition volume disagrees with hull volume")
        return poly

    @classmethod
    def from_halfspaces(cls, normals, supports) -> "Polytope":
        """Polytope {x : <nu_i, x> <= h_i}; facet measures recomputed.

        Normals need not be unit length; supports rescale accordingly.
        Redundant (non-binding) halfspaces are dropped.
        """
        normals = np.asarray(normals, dtype=np.float64)
        supports = np.asarray(supports, dtype=np.float64)
        if np.any(supports <= 0):
            raise FunlyzError("origin must be interior: all support numbers > 0")
        lens = np.linalg.norm(normals, axis=1)
        if np.any(lens == 0):
            raise FunlyzError("zero facet normal")
        unit = normals / lens[:, None]
        h = supports / lens
        # K = (K*)* with K* = conv{nu_i / h_i}.
        return cls.from_vertices(unit / h[:, None]).polar()

    def gauge_many(self, X):
        X = _check_dim(X, self.dim)
        vals, _, _ = gauge_polytope(X, self._gauge_slopes, GAUGE_TIE_TOL)
        return np.maximum(vals, 0.0)

    def gauge_grad_many(self, X):
        X = _check_dim(X, self.dim)
        vals, idx, ok = gauge_polytope(X, self._gauge_slopes, GAUGE_TIE_TOL)
        grads = self._gauge_slopes[idx]
        return np.maximum(vals, 0.0), grads, np.asarray(ok, dtype=bool)

    def support_many(self, U):
        U = _check_dim(U, self.dim)
        return np.max(U @ self.vertices.T, axis=1)

    def volume(self):
        return self._volume

    def polar(self):
        """K* = conv{nu_i / h_i}; exact vertex/facet duality."""
        return Polytope.from_vertices(self.normals / self.supports[:, None])

    def linear_image(self, T):
        T = np.asarray(T, dtype=np.float64)
        return Polytope.from_vertices(self.vertices @ T.T)

    def scale(self, c):
        c = float(c)
        if c <= 0:
            raise FunlyzError("scale factor must be positive")
        return Polytope(
            self.normals,
            self.supports * c,
            self.areas * c ** (self.dim - 1),
            self.vertices * c,
            self.facet_simplices * c,
        )


class Ellipsoid(ConvexBody):
    """Ellipsoid {x : x^T Q x <= 1} with Q symmetric positive-definite."""

    def __init__(self, Q):
        Q = np.asarray(Q, dtype=np.float64)
        self.dim = Q.shape[0]
        if Q.shape != (self.dim, self.dim):
            raise DimensionMismatchError("Q must be square")
        if np.max(np.abs(Q - Q.T)) > 1e-12 * max(1.0, np.max(np.abs(Q))):
            raise FunlyzError("Q must be symmetric")
        Q = 0.5 * (Q + Q.T)
        eigs = np.linalg.eigvalsh(Q)
        if eigs[0] <= 0:
            raise DegenerateError("Q must be positive-definite")
        self.Q = _readonly(Q)
        self._Qinv = _readonly(np.linalg.inv(Q))

    def gauge_many(self, X):
        X = _check_dim(X, self.dim)
        return np.sqrt(np.einsum("ij,jk,ik->i", X, self.Q, X))

    def gauge_grad_many(self, X):
        X = _check_dim(X, self.dim)
        vals = self.gauge_many(X)
        ok = vals > 1e-300
        safe = np.where(ok, vals, 1.0)
        grads = (X @ self.Q) / safe[:, None]
        return vals, grads, ok

    def support_many(self, U):
        U = _check_dim(U, self.dim)
        return np.sqrt(np.einsum("ij,jk,ik->i", U, self._Qinv, U))

    def volume(self):
        return ball_volume(self.dim) / math.sqrt(np.linalg.det(self.Q))

    def polar(self):
        return Ellipsoid(self._Qinv)

    def linear_image(self, T):
        T = np.asarray(T, dtype=np.float64)
        Tinv = np.linalg.inv(T)
        return Ellipsoid(Tinv.T @ self.Q @ Tinv)

    def boundary_transform(self):
        """Principal square root R = Q^(-1/2); w on S^(n-1) maps to R w on
        the boundary, pushing the uniform measure to the cone measure."""
        lam, V = np.linalg.eigh(self.Q)
        return (V * (1.0 / np.sqrt(lam))) @ V.T


class Ball(Ellipsoid):
    """Centered ball of given radius."""

    def __init__(self, dim: int, radius: float = 1.0):
        if radius <= 0:
            raise FunlyzError("radius must be positive")
        super().__init__(np.eye(dim) / radius**2)
        self.radius = float(radius)

    def polar(self):
        return Ball(self.dim, 1.0 / self.radius)

    def volume(self):
        return ball_volume(self.dim) * self.radius**self.dim


class Zonotope:
    """Origin-symmetric support object h(u) = sum_i |<g_i, u>|.

    Not a full `ConvexBody`; it exists to evaluate projection-body support
    functions exactly.
    """

    def __init__(self, generators):
        self.generators = _readonly(generators)
        self.dim = self.generators.shape[1]

    def support_many(self, U):
        U = _check_dim(U, self.dim)
        return np.sum(np.abs(U @ self.generators.T), axis=1)

    def support(self, u):
        return float(self.support_many(_check_dim(u, self.dim)[None, :])[0])


class QuadraticForm:
    """x -> x^T A x with A symmetric positive-semidefinite.

    The role tag records what the form means geometrically:
    "ellipsoid-gauge-squared", "log-density", or "support-squared".
    """

    def __init__(self, A, role: str = "ellipsoid-gauge-squared"):
        A = np.asarray(A, dtype=np.float64)
        if np.max(np.abs(A - A.T)) > 1e-12 * max(1.0, np.max(np.abs(A))):
            raise FunlyzError("quadratic form matrix must be symmetric")
        A = 0.5 * (A + A.T)
        eigs = np.linalg.eigvalsh(A)
        if eigs[0] < -1e-12 * max(1.0, abs(eigs[-1])):
            raise DegenerateError("quadratic form must be positive-semidefinite")
        self.A = _readonly(A)
        self.role = role
        self.min_eigenvalue = float(eigs[0])

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        return float(x @ self.A @ x)

    @property
    def dim(self):
        return self.A.shape[0]


def lyz_body_matrix(K: ConvexBody, quadrature_points: int = 1 << 17) -> QuadraticForm:
    """Quadratic surface-area body of K: the ellipsoid whose squared gauge is

        |u|^2 = (1/V(K)) * integral over the boundary of
                <u, nu(z)>^2 / <z, nu(z)>  dH^(n-1)(z).

    For polytopes the boundary measure is atomic and the sum is exact:
    Q = (1/V) sum_i (a_i / h_i) nu_i nu_i^T. For ellipsoids the integral is
    evaluated by parametric quadrature (periodic trapezoid on S^1, Fibonacci
    points on S^2) at a 1e-6 accuracy target; analytically every ellipsoid
    is a fixed point of this map.

    The printed definition of this body reads as rho^2 on its left side; a
    quadratic form in u can only be the squared gauge (= rho^(-2)) of an
    ellipsoid, which is also the reading its geometric-reduction identity
    forces, so that convention is implemented here.
    """
    n = K.dim
    if isinstance(K, Polytope):
        weights = K.areas / K.supports
        Q = (K.normals.T * weights) @ K.normals / K.volume()
    elif isinstance(K, Ellipsoid):
        W = circle_grid(quadrature_points) if n == 2 else fibonacci_sphere(quadrature_points)
        R = K.boundary_transform()
        Z = W @ R.T
        NU = Z @ K.Q
        nu_norm = np.linalg.norm(NU, axis=1)
        NU = NU / nu_norm[:, None]
        cos = np.einsum("ij,ij->i", Z, NU)
        # Surface element of w -> R w: |det R| * sqrt(w^T Q w) d w.
        detR = float(np.linalg.det(R))
        elem = detR * np.sqrt(np.einsum("ij,jk,ik->i", W, K.Q, W))
        sphere_total = 2.0 * math.pi if n == 2 else 4.0 * math.pi
        w = (sphere_total / quadrature_points) * elem / cos
        Q = np.einsum("i,ij,ik->jk", w, NU, NU) / K.volume()
    else:
        raise FunlyzError(f"unsupported body type {type(K).__name__}")
    Q = 0.5 * (Q + Q.T)
    if np.linalg.eigvalsh(Q)[0] <= 0:
        raise DegenerateError("surface normals span a proper subspace")
    return QuadraticForm(Q, role="ellipsoid-gauge-squared")


def projection_body(K: ConvexBody):
    """Projection body: h(u) = (1/2) * integral of |<u, v>| dS_K(v).

    Polytopes give the zonotope with generators a_i nu_i / 2; ellipsoids
    give another ellipsoid in closed form (for {x : x^T Q x <= 1} the
    support is vol_(n-1) of the shadow, omega_(n-1) |det R| |R u| with
    R = Q^(-1/2)).
    """
    if isinstance(K, Polytope):
        return Zonotope(K.normals * (K.areas / 2.0)[:, None])
    if isinstance(K, Ellipsoid):
        n = K.dim
        c = ball_volume(n - 1) / math.sqrt(np.linalg.det(K.Q))
        return Ellipsoid(K.Q / c**2)
    raise FunlyzError(f"unsupported body type {type(K).__name__}")


def square(halfwidth: float = 1.0) -> Polytope:
    s = float(halfwidth)
    return Polytope.from_vertices([[s, s], [-s, s], [-s, -s], [s, -s]])


def regular_polygon(sides: int, circumradius: float = 1.0) -> Polytope:
    theta = 2.0 * math.pi * np.arange(sides) / sides
    pts = circumradius * np.column_stack([np.cos(theta), np.sin(theta)])
    return Polytope.from_vertices(pts)


def cube(halfwidth: float = 1.0) -> Polytope:
    s = float(halfwidth)
    corners = [
        [sx * s, sy * s, sz * s]
        for sx in (-1, 1)
        for sy in (-1, 1)
        for sz in (-1, 1)
    ]
    return Polytope.from_vertices(corners)
