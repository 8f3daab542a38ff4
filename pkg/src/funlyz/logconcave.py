"""Log-concave functions f = exp(-phi) and their Minkowski algebra.

The support function of f is the Legendre conjugate of its potential; the
polar is exp(-phi*); the combination alpha.f (+) beta.g exponentiates the
infimal convolution of the right-scaled potentials, so its support function
is the weighted sum alpha h_f + beta h_g. The first variation of the total
mass along g is computed through the gradient-pushforward identity

    dJ(f, g) = integral of h_g(grad phi(x)) f(x) dx,

with the defining one-sided difference quotient retained as a cross-check
estimator only.
"""

import math

import numpy as np

from .constants import gaussian_mass
from .convex import (
    ConvexFunction,
    Quadratic,
    inf_convolution,
    scalar_right_mult,
)
from .errors import (
    DimensionMismatchError,
    FunlyzError,
    NotIntegrableError,
    VariationError,
)
from .integration import IntegralResult, IntegrationSpec, integrate_rn, pushforward_integrate

__all__ = (
    "LogConcaveFunction",
    "GaussianFunction",
    "standard_gaussian",
    "support_function",
    "polar_function",
    "minkowski_combine",
    "scale_log_concave",
    "total_mass",
    "first_variation",
    "normalized_first_variation",
    "variation_difference_quotient",
)


class LogConcaveFunction:
    """f = exp(-phi) with a convex potential phi.

    `integrable` is declared from the potential's coercivity (class-L
    membership per variant, not a runtime scan); non-integrable functions
    are representable but mass and variation operations refuse them.
    Mass results are cached write-once per integration fingerprint.
    """

    def __init__(self, potential: ConvexFunction):
        self.potential = potential
        self.dim = potential.dim
        self.integrable = potential.is_coercive()
        self._mass_cache: dict[str, IntegralResult] = {}

    def value_many(self, X) -> np.ndarray:
        vals, finite = self.potential.value_many(X)
        out = np.zeros(len(vals))
        np.exp(-vals[finite], out=out[finite])
        return out

    def value(self, x) -> float:
        return float(self.value_many(np.asarray(x, dtype=np.float64)[None, :])[0])

    def fingerprint(self) -> str:
        return self.potential.fingerprint()

    def compose_linear(self, T) -> "LogConcaveFunction":
        return _wrap(self.potential.compose_linear(T))

    def support_function(self) -> ConvexFunction:
        return self.potential.conjugate()

    def polar(self) -> "LogConcaveFunction":
        return _wrap(self.potential.conjugate())


class GaussianFunction(LogConcaveFunction):
    """exp(-|T x|^2 / 2), carried through the matrix M = T^T T.

    T is recovered as the principal square root of M, which pins a unique
    representative (the function depends on T only through M).
    """

    def __init__(self, M):
        M = np.asarray(M, dtype=np.float64)
        super().__init__(Quadratic(M))
        self.M = self.potential.A

    @property
    def T(self) -> np.ndarray:
        lam, V = np.linalg.eigh(self.M)
        return (V * np.sqrt(lam)) @ V.T

    @classmethod
    def from_T(cls, T) -> "GaussianFunction":
        T = np.asarray(T, dtype=np.float64)
        return cls(T.T @ T)

    def mass_exact(self) -> float:
        """(2 pi)^(n/2) / sqrt(det M), by the linear change of variables."""
        return gaussian_mass(self.dim) / math.sqrt(float(np.linalg.det(self.M)))

    def compose_linear(self, S) -> "GaussianFunction":
        S = np.asarray(S, dtype=np.float64)
        return GaussianFunction(S.T @ self.M @ S)


def standard_gaussian(n: int) -> GaussianFunction:
    return GaussianFunction(np.eye(n))


def _wrap(potential: ConvexFunction) -> LogConcaveFunction:
    A = potential.as_quadratic()
    if A is not None:
        return GaussianFunction(A)
    return LogConcaveFunction(potential)


def support_function(f: LogConcaveFunction) -> ConvexFunction:
    """h_f = phi*, the supremum of <x, .> + log f."""
    return f.support_function()


def polar_function(f: LogConcaveFunction) -> LogConcaveFunction:
    """f° = exp(-phi*). May come back non-integrable (flagged), in which
    case mass operations refuse it."""
    return f.polar()


def minkowski_combine(
    alpha: float, f: LogConcaveFunction, beta: float, g: LogConcaveFunction
) -> LogConcaveFunction:
    """alpha.f (+) beta.g = exp(-[(phi alpha) box (psi beta)]).

    Its support function is alpha h_f + beta h_g; the Gaussian subfamily
    collapses in closed form.
    """
    if f.dim != g.dim:
        raise DimensionMismatchError("operands must share a dimension")
    if alpha <= 0 or beta <= 0:
        raise FunlyzError("combination weights must be positive")
    pot = inf_convolution(
        scalar_right_mult(f.potential, alpha), scalar_right_mult(g.potential, beta)
    )
    return _wrap(pot)


def scale_log_concave(alpha: float, f: LogConcaveFunction) -> LogConcaveFunction:
    """alpha.f alone: exp(-(phi alpha))."""
    if alpha <= 0:
        raise FunlyzError("scaling weight must be positive")
    return _wrap(scalar_right_mult(f.potential, alpha))


def total_mass(f: LogConcaveFunction, spec: IntegrationSpec) -> IntegralResult:
    """J(f) = integral of f, cached per integration fingerprint."""
    if not f.integrable:
        raise NotIntegrableError("total mass of a non-integrable function")
    key = spec.fingerprint()
    cached = f._mass_cache.get(key)
    if cached is not None:
        return cached
    result = integrate_rn(None, f, spec)
    f._mass_cache.setdefault(key, result)
    return f._mass_cache[key]


def first_variation(
    f: LogConcaveFunction, g: LogConcaveFunction, spec: IntegrationSpec
) -> IntegralResult:
    """dJ(f, g) through the pushforward identity.

    Requires h_g finite on the range of grad phi (f-a.e.); an infinite
    support value on any sample raises VariationError. The difference
    quotient of the defining limit is available separately as
    `variation_difference_quotient`.
    """
    if f.dim != g.dim:
        raise DimensionMismatchError("operands must share a dimension")
    hg = g.support_function()

    def columns(Y, _X):
        vals, finite = hg.value_many(Y)
        if not np.all(finite):
            raise VariationError(
                "support function of g is infinite on the support of mu_f"
            )
        return vals

    return pushforward_integrate(f, spec, columns)


def normalized_first_variation(
    f: LogConcaveFunction, g: LogConcaveFunction, spec: IntegrationSpec
) -> IntegralResult:
    """dJ(f, g) / J(f), with the error bars combined in quadrature."""
    dj = first_variation(f, g, spec)
    jf = total_mass(f, spec)
    value = dj.value / jf.value
    stderr = abs(value) * math.hypot(
        dj.stderr / max(abs(dj.value), 1e-300), jf.stderr / max(abs(jf.value), 1e-300)
    )
    return IntegralResult(value, stderr, spec.fingerprint(), dj.rejects, dj.tol_met)


def variation_difference_quotient(
    f: LogConcaveFunction,
    g: LogConcaveFunction,
    spec: IntegrationSpec,
    steps=(1e-2, 1e-3),
) -> dict:
    """(J(f (+) t.g) - J(f)) / t at small t, with Richardson extrapolation.

    Cross-check estimator for the pushforward route; first-order accurate
    per step, the extrapolation removes the leading error term.
    """
    jf = total_mass(f, spec).value
    quotients = {}
    for t in steps:
        combined = minkowski_combine(1.0, f, float(t), g)
        if not combined.integrable:
            raise NotIntegrableError("combination left the integrable class")
        jt = total_mass(combined, spec).value
        quotients[float(t)] = (jt - jf) / float(t)
    out = {"quotients": quotients}
    if len(steps) >= 2:
        t1, t2 = float(steps[0]), float(steps[1])
        q1, q2 = quotients[t1], quotients[t2]
        out["richardson"] = (t1 * q2 - t2 * q1) / (t1 - t2)
    return out
