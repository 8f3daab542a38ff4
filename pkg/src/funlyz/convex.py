"""Proper convex functions on R^n and their Legendre-conjugate algebra.

Functions are immutable nodes: closed-form leaves (quadratics, gauge powers
of convex bodies, body indicators) and algebra nodes (linear composition,
left/right scalar multiplication, sums, infimal convolutions, sampled
grids). Conjugation is closed over this family:

    quadratic(A)*        = quadratic(A^-1)
    gauge_power(K, p)*   = gauge_power(K*, q)      1/p + 1/q = 1, p > 1
    gauge_power(K, 1)*   = indicator(K*)
    (phi o T)*           = phi* o T^-t
    (phi alpha)*         = alpha * phi*            right scaling, Eq.-style
    (c phi)*             = (phi*) c                left scaling
    (phi box psi)*       = phi* + psi*
    (phi + psi)*         = phi* box psi*
    grid*                = discrete transform      per-axis hull walk

Constructors simplify aggressively (e.g. a quadratic infimal convolution
collapses to the harmonic-mean quadratic), so the Gaussian subalgebra stays
exact end to end. Extended-real values are explicit tagged objects at the
scalar API; vectorized internals carry a parallel finiteness mask.
"""

import hashlib
import math

import numpy as np
import scipy.optimize

from .bodies import ConvexBody, Ellipsoid, Polytope, lyz_body_matrix
from .errors import (
    DimensionMismatchError,
    FunlyzError,
    NonDifferentiableError,
    NotProperError,
)
from .kernels import legendre_1d

__all__ = (
    "ExtendedReal",
    "ConvexFunction",
    "Quadratic",
    "GaugePower",
    "BodyIndicator",
    "LinearComposed",
    "RightScaled",
    "LeftScaled",
    "FunctionSum",
    "InfimalConvolution",
    "OriginIndicator",
    "ConstantFn",
    "SampledGrid",
    "quadratic",
    "gauge_power",
    "inf_convolution",
    "scalar_right_mult",
    "scalar_left_mult",
    "fenchel_young_gap",
)


class ExtendedReal:
    """A finite real or +infinity, as an explicit tag (never a sentinel
    float in arithmetic). +infinity absorbs addition and never appears as a
    gradient."""

    __slots__ = ("finite", "value")

    def __init__(self, value: float):
        self.value = float(value)
        self.finite = True

    @classmethod
    def infinity(cls) -> "ExtendedReal":
        out = cls.__new__(cls)
        out.value = math.inf
        out.finite = False
        return out

    def __add__(self, other):
        if isinstance(other, ExtendedReal):
            if self.finite and other.finite:
                return ExtendedReal(self.value + other.value)
            return ExtendedReal.infinity()
        if self.finite:
            return ExtendedReal(self.value + float(other))
        return ExtendedReal.infinity()

    __radd__ = __add__

    def __lt__(self, other):
        return self.value < _as_value(other)

    def __le__(self, other):
        return self.value <= _as_value(other)

    def __gt__(self, other):
        return self.value > _as_value(other)

    def __ge__(self, other):
        return self.value >= _as_value(other)

    def __eq__(self, other):
        if isinstance(other, ExtendedReal):
            return self.finite == other.finite and self.value == other.value
        return self.finite and self.value == other

    def __hash__(self):
        return hash((self.finite, self.value))

    def __repr__(self):
        return f"ExtendedReal({self.value!r})" if self.finite else "ExtendedReal(+inf)"


def _as_value(x) -> float:
    return x.value if isinstance(x, ExtendedReal) else float(x)


def _check_points(X, n):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.shape[1] != n:
        raise DimensionMismatchError(f"expected dimension {n}, got {X.shape[1]}")
    return X


def _matrix(M, n=None):
    M = np.array(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionMismatchError("expected a square matrix")
    if n is not None and M.shape[0] != n:
        raise DimensionMismatchError(f"expected a {n}x{n} matrix")
    return M


class ConvexFunction:
    """Base class; subclasses implement the vectorized value/gradient pair
    and the conjugacy rule."""

    dim: int

    # -- evaluation ------------------------------------------------------

    def evaluate(self, x) -> ExtendedReal:
        """phi(x) as an extended real; +infinity outside the domain."""
        vals, finite = self.value_many(_check_points(x, self.dim))
        return ExtendedReal(vals[0]) if finite[0] else ExtendedReal.infinity()

    def value_many(self, X):
        """Vectorized values with a finiteness mask.

        Returns (values, finite); entries with finite=False hold +inf, and
        the mask is the authoritative tag.
        """
        raise NotImplementedError

    def gradient(self, x):
        """Gradient at an interior smooth point.

        Raises NonDifferentiableError on a kink (callers resample) and
        FunlyzError outside the domain interior.
        """
        x = _check_points(x, self.dim)
        _, finite = self.value_many(x)
        if not finite[0]:
            raise FunlyzError("gradient requested outside the effective domain")
        G, ok = self.gradient_many(x)
        if not ok[0]:
            raise NonDifferentiableError("gradient requested on a non-smooth locus")
        return G[0]

    def gradient_many(self, X):
        """Vectorized gradients and a smoothness mask; where the mask is
        False the row holds a deterministic subgradient choice."""
        raise NotImplementedError

    # -- algebra ---------------------------------------------------------

    def conjugate(self) -> "ConvexFunction":
        raise NotImplementedError

    def compose_linear(self, T) -> "ConvexFunction":
        """x -> phi(T x) for invertible T, with closed-form collapses."""
        return LinearComposed(self, T)

    def scale_right(self, alpha: float) -> "ConvexFunction":
        """(phi alpha)(x) = alpha * phi(x / alpha), alpha > 0."""
        return scalar_right_mult(self, alpha)

    def scale_left(self, c: float) -> "ConvexFunction":
        """Pointwise c * phi, c > 0."""
        return scalar_left_mult(self, c)

    # -- structure -------------------------------------------------------

    def is_coercive(self) -> bool:
        """Whether phi -> +inf along every ray (declared per variant)."""
        raise NotImplementedError

    def as_quadratic(self):
        """The matrix A when phi(x) = x^T A x / 2 exactly, else None."""
        return None

    def hessian_proxy(self):
        """An SPD curvature scale used to standardize integration domains;
        exact for the quadratic family, shape-only elsewhere."""
        raise NotImplementedError

    def _structure(self):
        """Canonical nested description for fingerprinting."""
        raise NotImplementedError

    def fingerprint(self) -> str:
        payload = repr(self._structure()).encode()
        return hashlib.sha256(payload).hexdigest()[:16]


def _body_structure(K: ConvexBody):
    if isinstance(K, Polytope):
        return ("polytope", K.normals.round(12).tolist(), K.supports.round(12).tolist())
    if isinstance(K, Ellipsoid):
        return ("ellipsoid", K.Q.round(12).tolist())
    return ("body", type(K).__name__)


def _body_hessian_proxy(K: ConvexBody):
    if isinstance(K, Ellipsoid):
        return np.array(K.Q)
    return np.array(lyz_body_matrix(K).A)


class Quadratic(ConvexFunction):
    """phi(x) = x^T A x / 2 with A symmetric positive-definite."""

    def __init__(self, A):
        A = _matrix(A)
        if np.max(np.abs(A - A.T)) > 1e-12 * max(1.0, np.max(np.abs(A))):
            raise FunlyzError("quadratic matrix must be symmetric")
        A = 0.5 * (A + A.T)
        if np.linalg.eigvalsh(A)[0] <= 0:
            raise FunlyzError("quadratic matrix must be positive-definite")
        self.A = A
        self.A.setflags(write=False)
        self.dim = A.shape[0]

    def value_many(self, X):
        X = _check_points(X, self.dim)
        vals = 0.5 * np.einsum("ij,jk,ik->i", X, self.A, X)
        return vals, np.ones(len(vals), dtype=bool)

    def gradient_many(self, X):
        X = _check_points(X, self.dim)
        return X @ self.A, np.ones(len(X), dtype=bool)

    def conjugate(self):
        return Quadratic(np.linalg.inv(self.A))

    def compose_linear(self, T):
        T = _matrix(T, self.dim)
        return Quadratic(T.T @ self.A @ T)

    def is_coercive(self):
        return True

    def as_quadratic(self):
        return np.array(self.A)

    def hessian_proxy(self):
        return np.array(self.A)

    def _structure(self):
        return ("quadratic", self.A.round(14).tolist())


class GaugePower(ConvexFunction):
    """phi(x) = |x|_K^p / p for a body K with the origin interior, p >= 1.

    Smooth off the facet-cone boundaries of polytope gauges; for p > 1 also
    smooth at the origin (gradient zero there).
    """

    def __init__(self, body: ConvexBody, p: float):
        if p < 1:
            raise FunlyzError("gauge powers require p >= 1")
        self.body = body
        self.p = float(p)
        self.dim = body.dim

    def value_many(self, X):
        g = self.body.gauge_many(_check_points(X, self.dim))
        return g**self.p / self.p, np.ones(len(g), dtype=bool)

    def gradient_many(self, X):
        X = _check_points(X, self.dim)
        g, grads, ok = self.body.gauge_grad_many(X)
        if self.p == 1.0:
            return grads, ok
        vals = g ** (self.p - 1.0)
        at_zero = g <= 1e-300
        out = vals[:, None] * grads
        if np.any(at_zero):
            # |x|^p/p with p > 1 is differentiable at 0 with gradient 0.
            out[at_zero] = 0.0
            ok = ok | at_zero
        return out, ok

    def conjugate(self):
        polar = self.body.polar()
        if self.p == 1.0:
            return BodyIndicator(polar)
        q = self.p / (self.p - 1.0)
        return GaugePower(polar, q)

    def compose_linear(self, T):
        T = _matrix(T, self.dim)
        return GaugePower(self.body.linear_image(np.linalg.inv(T)), self.p)

    def is_coercive(self):
        return True

    def as_quadratic(self):
        if self.p == 2.0 and isinstance(self.body, Ellipsoid):
            return np.array(self.body.Q)
        return None

    def hessian_proxy(self):
        return _body_hessian_proxy(self.body)

    def _structure(self):
        return ("gauge_power", _body_structure(self.body), self.p)


class BodyIndicator(ConvexFunction):
    """0 on K, +infinity outside; the conjugate of the plain gauge of K*."""

    def __init__(self, body: ConvexBody):
        self.body = body
        self.dim = body.dim

    def value_many(self, X):
        g = self.body.gauge_many(_check_points(X, self.dim))
        finite = g <= 1.0
        vals = np.where(finite, 0.0, np.inf)
        return vals, finite

    def gradient_many(self, X):
        X = _check_points(X, self.dim)
        g = self.body.gauge_many(X)
        ok = g < 1.0 - 1e-12
        return np.zeros_like(X), ok

    def conjugate(self):
        return GaugePower(self.body.polar(), 1.0)

    def compose_linear(self, T):
        T = _matrix(T, self.dim)
        return BodyIndicator(self.body.linear_image(np.linalg.inv(T)))

    def is_coercive(self):
        return True  # bounded effective domain

    def hessian_proxy(self):
        return _body_hessian_proxy(self.body)

    def _structure(self):
        return ("indicator", _body_structure(self.body))


class OriginIndicator(ConvexFunction):
    """Indicator of {0}: the identity element of infimal convolution."""

    def __init__(self, dim: int):
        self.dim = int(dim)

    def value_many(self, X):
        X = _check_points(X, self.dim)
        finite = np.all(X == 0.0, axis=1)
        return np.where(finite, 0.0, np.inf), finite

    def gradient_many(self, X):
        X = _check_points(X, self.dim)
        return np.zeros_like(X), np.zeros(len(X), dtype=bool)

    def conjugate(self):
        return ConstantFn(self.dim, 0.0)

    def is_coercive(self):
        return True

    def hessian_proxy(self):
        return np.eye(self.dim)

    def _structure(self):
        return ("origin_indicator", self.dim)


class ConstantFn(ConvexFunction):
    """phi = c everywhere; not coercive."""

    def __init__(self, dim: int, c: float):
        self.dim = int(dim)
        self.c = float(c)

    def value_many(self, X):
        X = _check_points(X, self.dim)
        return np.full(len(X), self.c), np.ones(len(X), dtype=bool)

    def gradient_many(self, X):
        X = _check_points(X, self.dim)
        return np.zeros_like(X), np.ones(len(X), dtype=bool)

    def conjugate(self):
        return OriginIndicator(self.dim) if self.c == 0.0 else _ShiftedOrigin(self.dim, -self.c)

    def is_coercive(self):
        return False

    def hessian_proxy(self):
        return np.eye(self.dim)

    def _structure(self):
        return ("constant", self.dim, self.c)


class _ShiftedOrigin(OriginIndicator):
    """Indicator of {0} plus a constant offset."""

    def __init__(self, dim: int, offset: float):
        super().__init__(dim)
        self.offset = float(offset)

    def value_many(self, X):
        vals, finite = super().value_many(X)
        return np.where(finite, self.offset, np.inf), finite

    def conjugate(self):
        return ConstantFn(self.dim, -self.offset)

    def _structure(self):
        return ("origin_indicator", self.dim, self.offset)


class LinearComposed(ConvexFunction):
    """phi(x) = base(T x), T invertible; conjugate is base* o T^-t."""

    def __init__(self, base: ConvexFunction, T):
        T = _matrix(T, base.dim)
        if abs(np.linalg.det(T)) < 1e-300:
            raise FunlyzError("composition matrix must be invertible")
        self.base = base
        self.T = T
        self.T.setflags(write=False)
        self.dim = base.dim

    def value_many(self, X):
        return self.base.value_many(_check_points(X, self.dim) @ self.T.T)

    def gradient_many(self, X):
        G, ok = self.base.gradient_many(_check_points(X, self.dim) @ self.T.T)
        return G @ self.T, ok

    def conjugate(self):
        return self.base.conjugate().compose_linear(np.linalg.inv(self.T).T)

    def compose_linear(self, S):
        S = _matrix(S, self.dim)
        return self.base.compose_linear(self.T @ S)

    def is_coercive(self):
        return self.base.is_coercive()

    def as_quadratic(self):
        A = self.base.as_quadratic()
        if A is None:
            return None
        return self.T.T @ A @ self.T

    def hessian_proxy(self):
        return self.T.T @ self.base.hessian_proxy() @ self.T

    def _structure(self):
        return ("composed", self.base._structure(), self.T.round(14).tolist())


class RightScaled(ConvexFunction):
    """(phi alpha)(x) = alpha * phi(x / alpha); (phi alpha)* = alpha phi*."""

    def __init__(self, base: ConvexFunction, alpha: float):
        if alpha <= 0:
            raise FunlyzError("right scaling requires alpha > 0")
        self.base = base
        self.alpha = float(alpha)
        self.dim = base.dim

    def value_many(self, X):
        vals, finite = self.base.value_many(_check_points(X, self.dim) / self.alpha)
        return self.alpha * vals, finite

    def gradient_many(self, X):
        return self.base.gradient_many(_check_points(X, self.dim) / self.alpha)

    def conjugate(self):
        return self.base.conjugate().scale_left(self.alpha)

    def is_coercive(self):
        return self.base.is_coercive()

    def as_quadratic(self):
        A = self.base.as_quadratic()
        return None if A is None else A / self.alpha

    def hessian_proxy(self):
        return self.base.hessian_proxy() / self.alpha

    def _structure(self):
        return ("right_scaled", self.base._structure(), self.alpha)


class LeftScaled(ConvexFunction):
    """Pointwise c * phi; conjugate is the right scaling of phi* by c."""

    def __init__(self, base: ConvexFunction, c: float):
        if c <= 0:
            raise FunlyzError("left scaling requires c > 0")
        self.base = base
        self.c = float(c)
        self.dim = base.dim

    def value_many(self, X):
        vals, finite = self.base.value_many(X)
        return self.c * vals, finite

    def gradient_many(self, X):
        G, ok = self.base.gradient_many(X)
        return self.c * G, ok

    def conjugate(self):
        return scalar_right_mult(self.base.conjugate(), self.c)

    def is_coercive(self):
        return self.base.is_coercive()

    def as_quadratic(self):
        A = self.base.as_quadratic()
        return None if A is None else self.c * A

    def hessian_proxy(self):
        return self.c * self.base.hessian_proxy()

    def _structure(self):
        return ("left_scaled", self.base._structure(), self.c)


class FunctionSum(ConvexFunction):
    """phi + psi; conjugate is the infimal convolution of the conjugates."""

    def __init__(self, left: ConvexFunction, right: ConvexFunction):
        if left.dim != right.dim:
            raise DimensionMismatchError("summands must share a dimension")
        self.left = left
        self.right = right
        self.dim = left.dim

    def value_many(self, X):
        lv, lf = self.left.value_many(X)
        rv, rf = self.right.value_many(X)
        finite = lf & rf
        return np.where(finite, lv + rv, np.inf), finite

    def gradient_many(self, X):
        lg, lo = self.left.gradient_many(X)
        rg, ro = self.right.gradient_many(X)
        return lg + rg, lo & ro

    def conjugate(self):
        return inf_convolution(self.left.conjugate(), self.right.conjugate())

    def is_coercive(self):
        return self.left.is_coercive() or self.right.is_coercive()

    def as_quadratic(self):
        a = self.left.as_quadratic()
        b = self.right.as_quadratic()
        if a is None or b is None:
            return None
        return a + b

    def hessian_proxy(self):
        return self.left.hessian_proxy() + self.right.hessian_proxy()

    def _structure(self):
        return ("sum", self.left._structure(), self.right._structure())


class InfimalConvolution(ConvexFunction):
    """(phi box psi)(x) = inf_y phi(x - y) + psi(y).

    Closed-form pairs collapse in `inf_convolution` before this node is
    built; what remains evaluates by multi-start numerical minimization and
    is intended for cross-checks, not hot paths. The conjugate is exact:
    phi* + psi*.
    """

    _STARTS = 5

    def __init__(self, left: ConvexFunction, right: ConvexFunction):
        if left.dim != right.dim:
            raise DimensionMismatchError("operands must share a dimension")
        self.left = left
        self.right = right
        self.dim = left.dim

    def _value_single(self, x):
        def objective(y):
            lv, lf = self.left.value_many((x - y)[None, :])
            rv, rf = self.right.value_many(y[None, :])
            if not (lf[0] and rf[0]):
                return 1e300
            return lv[0] + rv[0]

        best = math.inf
        starts = [np.zeros(self.dim), 0.5 * x, np.array(x)]
        for k in range(self._STARTS - len(starts)):
            starts.append(x * (k + 1) / self._STARTS)
        for y0 in starts:
            res = scipy.optimize.minimize(objective, y0, method="Nelder-Mead")
            best = min(best, float(res.fun))
        return best

    def value_many(self, X):
        X = _check_points(X, self.dim)
        vals = np.array([self._value_single(x) for x in X])
        finite = vals < 1e299
        return np.where(finite, vals, np.inf), finite

    def gradient_many(self, X):
        raise NonDifferentiableError(
            "gradients of symbolic infimal convolutions are not provided"
        )

    def conjugate(self):
        return FunctionSum(self.left.conjugate(), self.right.conjugate())

    def is_coercive(self):
        return self.left.is_coercive() and self.right.is_coercive()

    def hessian_proxy(self):
        hl = np.linalg.inv(self.left.hessian_proxy())
        hr = np.linalg.inv(self.right.hessian_proxy())
        return np.linalg.inv(hl + hr)

    def _structure(self):
        return ("inf_conv", self.left._structure(), self.right._structure())


class SampledGrid(ConvexFunction):
    """Extended-real values on an axis-aligned lattice.

    Input data is convexified on ingestion (lower convex envelope via the
    double discrete transform) unless already convex; `was_convex` records
    which. Evaluation is multilinear interpolation inside the box and
    +infinity outside; gradients are central finite differences at the grid
    step. The discrete conjugate runs one linear-time hull pass per axis,
    with each dual axis spanning the range of observed slopes.
    """

    def __init__(self, axes, values, was_convex=None):
        self.axes = tuple(np.ascontiguousarray(a, dtype=np.float64) for a in axes)
        values = np.asarray(values, dtype=np.float64)
        if values.shape != tuple(len(a) for a in self.axes):
            raise DimensionMismatchError("grid values must match axis lengths")
        if not np.any(np.isfinite(values)):
            raise NotProperError("grid function has empty effective domain")
        for a in self.axes:
            if len(a) < 2 or np.any(np.diff(a) <= 0):
                raise FunlyzError("grid axes must be strictly increasing")
        self.dim = len(self.axes)
        self.values = values
        self.values.setflags(write=False)
        if was_convex is None:
            # The envelope never exceeds the data; "already convex" means
            # the data never exceeds the envelope beyond tolerance.
            env = _grid_biconjugate(self.axes, values)
            scale = max(1.0, float(np.max(np.abs(np.where(np.isfinite(values), values, 0.0)))))
            gap = np.where(np.isfinite(values), values - env, 0.0)
            was_convex = bool(np.all(gap <= 1e-9 * scale))
            if not was_convex:
                self.values = np.where(np.isfinite(values), env, np.inf)
                self.values.setflags(write=False)
        self.was_convex = bool(was_convex)

    @classmethod
    def from_box(cls, box, values):
        axes = [np.linspace(lo, hi, m) for (lo, hi), m in zip(box, np.shape(values))]
        return cls(axes, values)

    def value_many(self, X):
        X = _check_points(X, self.dim)
        inside = np.ones(len(X), dtype=bool)
        idx = []
        frac = []
        for d, a in enumerate(self.axes):
            inside &= (X[:, d] >= a[0]) & (X[:, d] <= a[-1])
            j = np.clip(np.searchsorted(a, X[:, d], side="right") - 1, 0, len(a) - 2)
            idx.append(j)
            frac.append((X[:, d] - a[j]) / (a[j + 1] - a[j]))
        vals = np.zeros(len(X))
        for corner in range(1 << self.dim):
            weight = np.ones(len(X))
            pos = []
            for d in range(self.dim):
                if corner >> d & 1:
                    weight = weight * frac[d]
                    pos.append(idx[d] + 1)
                else:
                    weight = weight * (1.0 - frac[d])
                    pos.append(idx[d])
            vals = vals + weight * self.values[tuple(pos)]
        finite = inside & np.isfinite(vals)
        return np.where(finite, vals, np.inf), finite

    def gradient_many(self, X):
        X = _check_points(X, self.dim)
        G = np.zeros_like(X)
        ok = np.ones(len(X), dtype=bool)
        for d, a in enumerate(self.axes):
            step = a[1] - a[0]
            lo = np.array(X)
            hi = np.array(X)
            lo[:, d] = np.maximum(X[:, d] - step, a[0])
            hi[:, d] = np.minimum(X[:, d] + step, a[-1])
            vlo, flo = self.value_many(lo)
            vhi, fhi = self.value_many(hi)
            ok &= flo & fhi
            with np.errstate(invalid="ignore"):
                G[:, d] = np.where(ok, (vhi - vlo) / (hi[:, d] - lo[:, d]), 0.0)
        return G, ok

    def conjugate(self):
        dual_axes, dual_values = _grid_conjugate(self.axes, self.values)
        return SampledGrid(dual_axes, dual_values, was_convex=True)

    def is_coercive(self):
        return _grid_is_coercive(self.values)

    def hessian_proxy(self):
        return np.eye(self.dim)

    def _structure(self):
        return (
            "grid",
            tuple((float(a[0]), float(a[-1]), len(a)) for a in self.axes),
            hashlib.sha256(np.ascontiguousarray(self.values).tobytes()).hexdigest()[:16],
        )


def _observed_slope_axis(axes, values, axis):
    moved = np.moveaxis(values, axis, 0)
    x = axes[axis]
    with np.errstate(invalid="ignore"):
        diffs = np.diff(moved, axis=0) / np.diff(x).reshape(-1, *([1] * (moved.ndim - 1)))
    finite = np.isfinite(diffs)
    if not np.any(finite):
        lo, hi = -1.0, 1.0
    else:
        lo = float(np.min(diffs[finite]))
        hi = float(np.max(diffs[finite]))
        if hi - lo < 1e-12:
            lo, hi = lo - 1.0, hi + 1.0
    return np.linspace(lo, hi, len(x))


def _grid_conjugate(axes, values):
    """Full discrete conjugate: one hull pass per axis, negating between
    passes so each pass is a plain max_i (s x_i - f_i) transform."""
    n = len(axes)
    dual_axes = tuple(_observed_slope_axis(axes, values, d) for d in range(n))
    work = np.array(values)
    for d in reversed(range(n)):
        first = d == n - 1
        src = work if first else -work
        moved = np.moveaxis(src, d, -1)
        flat = moved.reshape(-1, moved.shape[-1])
        out = np.empty((flat.shape[0], len(dual_axes[d])))
        for row in range(flat.shape[0]):
            out[row] = legendre_1d(axes[d], flat[row], dual_axes[d])
        work = np.moveaxis(out.reshape(*moved.shape[:-1], -1), -1, d)
    return dual_axes, work


def _grid_biconjugate(axes, values):
    """Lower convex envelope of grid data, evaluated back on the same grid
    via two discrete conjugations."""
    dual_axes, dual_values = _grid_conjugate(axes, values)
    n = len(axes)
    work = np.array(dual_values)
    for d in reversed(range(n)):
        first = d == n - 1
        src = work if first else -work
        moved = np.moveaxis(src, d, -1)
        flat = moved.reshape(-1, moved.shape[-1])
        out = np.empty((flat.shape[0], len(axes[d])))
        for row in range(flat.shape[0]):
            out[row] = legendre_1d(dual_axes[d], flat[row], axes[d])
        work = np.moveaxis(out.reshape(*moved.shape[:-1], -1), -1, d)
    return work


def _grid_is_coercive(values):
    """Declared-coercivity check: along every axis and transverse index the
    data either ends in +inf (bounded domain) or strictly increases at the
    outer edge."""
    n = values.ndim
    for d in range(n):
        moved = np.moveaxis(values, d, 0)
        flat = moved.reshape(moved.shape[0], -1)
        hi_inf = ~np.isfinite(flat[-1])
        hi_up = flat[-1] - flat[-2] > 0
        lo_inf = ~np.isfinite(flat[0])
        lo_up = flat[0] - flat[1] > 0
        with np.errstate(invalid="ignore"):
            if not np.all(hi_inf | hi_up) or not np.all(lo_inf | lo_up):
                return False
    return True


# -- factory operations ----------------------------------------------------


def quadratic(A) -> Quadratic:
    return Quadratic(A)


def gauge_power(body: ConvexBody, p: float) -> GaugePower:
    return GaugePower(body, p)


def inf_convolution(phi: ConvexFunction, psi: ConvexFunction) -> ConvexFunction:
    """Infimal convolution with closed-form collapses.

    Quadratic pairs collapse through the conjugate route ((phi box psi)* =
    phi* + psi*, so the matrices combine harmonically); the indicator of
    {0} is the identity element. Remaining pairs stay symbolic and evaluate
    by numerical minimization.
    """
    if phi.dim != psi.dim:
        raise DimensionMismatchError("operands must share a dimension")
    a, b = phi.as_quadratic(), psi.as_quadratic()
    if a is not None and b is not None:
        return Quadratic(np.linalg.inv(np.linalg.inv(a) + np.linalg.inv(b)))
    if isinstance(phi, OriginIndicator) and not isinstance(phi, _ShiftedOrigin):
        return psi
    if isinstance(psi, OriginIndicator) and not isinstance(psi, _ShiftedOrigin):
        return phi
    return InfimalConvolution(phi, psi)


def scalar_right_mult(phi: ConvexFunction, alpha: float) -> ConvexFunction:
    """(phi alpha)(x) = alpha * phi(x / alpha) with closed-form collapses:
    quadratics rescale their matrix, gauge powers rescale their body, and
    1-homogeneous gauges are fixed points."""
    if alpha <= 0:
        raise FunlyzError("right scalar multiplication requires alpha > 0")
    if alpha == 1.0:
        return phi
    if isinstance(phi, Quadratic):
        return Quadratic(phi.A / alpha)
    if isinstance(phi, GaugePower):
        if phi.p == 1.0:
            return phi
        return GaugePower(phi.body.scale(alpha ** ((phi.p - 1.0) / phi.p)), phi.p)
    if isinstance(phi, RightScaled):
        return scalar_right_mult(phi.base, phi.alpha * alpha)
    return RightScaled(phi, alpha)


def scalar_left_mult(phi: ConvexFunction, c: float) -> ConvexFunction:
    """Pointwise c * phi with the same closed-form collapses as the right
    scaling (c |x|_K^p / p is the gauge power of a rescaled body)."""
    if c <= 0:
        raise FunlyzError("left scaling requires c > 0")
    if c == 1.0:
        return phi
    if isinstance(phi, Quadratic):
        return Quadratic(c * phi.A)
    if isinstance(phi, GaugePower):
        return GaugePower(phi.body.scale(c ** (-1.0 / phi.p)), phi.p)
    if isinstance(phi, LeftScaled):
        return scalar_left_mult(phi.base, phi.c * c)
    return LeftScaled(phi, c)


def fenchel_young_gap(phi: ConvexFunction, x, y) -> float:
    """phi(x) + phi*(y) - <x, y>; nonnegative, zero iff y is a subgradient
    of phi at x."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    fx = phi.evaluate(x)
    fy = phi.conjugate().evaluate(y)
    if not (fx.finite and fy.finite):
        raise FunlyzError("Fenchel-Young gap requires finite phi(x) and phi*(y)")
    return fx.value + fy.value - float(np.dot(x, y))
