"""The quadratic-form ellipsoid functional of a log-concave function.

For f = exp(-phi) with mass J(f), the associated Gaussian-type function is
exp(-x^T A x) where

    A = (n / 4 J(f)) * integral of  (g g^T / phi*(g))  f(x) dx,   g = grad phi(x),

the normalized, support-weighted second moment of the gradient-pushforward
measure. The denominator uses the gradient identity phi*(grad phi(x)) =
<x, grad phi(x)> - phi(x), so no conjugate evaluations happen per sample.
The normalization makes the standard Gaussian a fixed point (A = I/2), the
construction intertwines with GL(n), and for squared-gauge weights it
reduces to the classical quadratic surface-area body of the underlying
polytope or ellipsoid.
"""

import math
import threading
import warnings
from dataclasses import dataclass

import numpy as np

from .bodies import QuadraticForm
from .errors import DegenerateError, DimensionMismatchError
from .integration import (
    IntegrationSpec,
    pushforward_integrate,
    quadrature_nodes_per_axis,
)
from .logconcave import LogConcaveFunction

__all__ = ("FunctionalEllipsoid", "lyz_matrix", "evaluate_gamma", "support_of_polar", "check_equivariance", "EquivarianceReport")

# Samples whose denominator falls below this fraction of the chunk median
# are rejected (the quotient is 0/0 near the potential's minimizer; both
# sides vanish, numerator at second order).
DENOMINATOR_FLOOR = 1e-12
# Degeneracy flag threshold: rejected fraction of the budget.
REJECT_FRACTION = 1e-3


@dataclass(frozen=True)
class FunctionalEllipsoid:
    """Result wrapper: -log of the output Gaussian-type function is the
    quadratic form x^T A x; value 1 at the origin by construction."""

    form: QuadraticForm
    mass: float
    stderr: np.ndarray
    source_fingerprint: str
    spec_fingerprint: str
    rejects: int
    degenerate_flag: bool

    @property
    def A(self) -> np.ndarray:
        return self.form.A

    @property
    def min_eigenvalue(self) -> float:
        return self.form.min_eigenvalue


def _check_centered(f: LogConcaveFunction):
    """The support-weighted moment needs phi >= 0 with phi(0) = 0 (maximum
    of f equal to 1 at the origin); otherwise the per-sample denominator
    can change sign. Surfaced as a warning, not an error."""
    at0 = f.potential.evaluate(np.zeros(f.dim))
    if not at0.finite or abs(at0.value) > 1e-9:
        warnings.warn(
            "potential is not centered (phi(0) != 0); the ellipsoid functional "
            "assumes the maximum of f is 1 at the origin",
            stacklevel=3,
        )


def _upper_indices(n):
    return [(i, j) for i in range(n) for j in range(i, n)]


def lyz_matrix(f: LogConcaveFunction, spec: IntegrationSpec) -> FunctionalEllipsoid:
    """Compute A = (n / 4 J(f)) * integral of (g g^T / phi*(g)) f dx.

    Per-sample denominators below DENOMINATOR_FLOOR times the chunk median
    are rejected and counted; if rejections exceed REJECT_FRACTION of the
    budget the result is flagged degenerate. The accumulated matrix is
    symmetrized and must come out positive-definite.
    """
    _check_centered(f)
    n = f.dim
    pairs = _upper_indices(n)
    reject_entries = []
    lock = threading.Lock()
    potential = f.potential

    def columns(Y, X):
        vals, _finite = potential.value_many(X)
        den = np.einsum("ij,ij->i", X, Y) - vals
        floor = DENOMINATOR_FLOOR * max(float(np.median(den)), 1e-300)
        good = den > floor
        with lock:
            reject_entries.append((len(Y), int(np.sum(~good))))
        safe = np.where(good, den, 1.0)
        cols = np.empty((len(Y), len(pairs) + 1))
        cols[:, 0] = 1.0
        for c, (i, j) in enumerate(pairs):
            cols[:, c + 1] = np.where(good, Y[:, i] * Y[:, j] / safe, 0.0)
        return cols

    result = pushforward_integrate(f, spec, columns)
    # Under quadrature the engine re-runs the columns on a coarse grid for
    # the error estimate; count denominator rejections from the main pass
    # only (its blocks complete before the coarse pass starts).
    if spec.backend == "quadrature":
        main_total = quadrature_nodes_per_axis(n, spec.budget) ** n
    else:
        main_total = spec.budget
    denominator_rejects = 0
    seen = 0
    for rows, cnt in reject_entries:
        if seen >= main_total:
            break
        denominator_rejects += cnt
        seen += rows
    values = np.asarray(result.value)
    errors = np.asarray(result.stderr)
    mass = float(values[0])
    mass_err = float(errors[0])
    if not math.isfinite(mass) or mass <= 0:
        raise DegenerateError("mass estimate is not positive and finite")
    raw = np.zeros((n, n))
    raw_err = np.zeros((n, n))
    for c, (i, j) in enumerate(pairs):
        raw[i, j] = raw[j, i] = values[c + 1]
        raw_err[i, j] = raw_err[j, i] = errors[c + 1]
    scale = n / (4.0 * mass)
    A = scale * 0.5 * (raw + raw.T)
    # Ratio-rule propagation: dA <= scale * draw + |A| * dJ / J.
    stderr = scale * raw_err + np.abs(A) * (mass_err / mass)
    rejects = result.rejects + denominator_rejects
    degenerate = denominator_rejects > REJECT_FRACTION * spec.budget
    if np.linalg.eigvalsh(A)[0] <= 0:
        raise DegenerateError("ellipsoid matrix is not positive-definite")
    return FunctionalEllipsoid(
        form=QuadraticForm(A, role="log-density"),
        mass=mass,
        stderr=stderr,
        source_fingerprint=f.fingerprint(),
        spec_fingerprint=spec.fingerprint(),
        rejects=rejects,
        degenerate_flag=degenerate,
    )


def evaluate_gamma(e: FunctionalEllipsoid, x) -> float:
    """The output Gaussian-type function exp(-x^T A x); 1 at the origin."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (e.form.dim,):
        raise DimensionMismatchError(f"expected a point in R^{e.form.dim}")
    return math.exp(-e.form(x))


def support_of_polar(e: FunctionalEllipsoid, x) -> float:
    """Support function of the polar object: the same data read as the
    2-homogeneous form x^T A x."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (e.form.dim,):
        raise DimensionMismatchError(f"expected a point in R^{e.form.dim}")
    return e.form(x)


@dataclass(frozen=True)
class EquivarianceReport:
    matrix_composed: np.ndarray
    matrix_transported: np.ndarray
    rel_discrepancy: float
    error_bound: float
    passed: bool


def check_equivariance(
    f: LogConcaveFunction,
    T,
    spec: IntegrationSpec,
    tol: float = 2e-2,
    base: FunctionalEllipsoid = None,
) -> EquivarianceReport:
    """Intertwining check: the ellipsoid matrix of f o T against T^t A_f T,
    both computed independently; passes when the relative Frobenius
    discrepancy is below max(tol, 3x the combined integration error).
    `base` short-circuits recomputing A_f when probing many T against one f.
    """
    T = np.asarray(T, dtype=np.float64)
    e_base = base if base is not None else lyz_matrix(f, spec)
    e_comp = lyz_matrix(f.compose_linear(T), spec)
    transported = T.T @ e_base.A @ T
    ref = np.linalg.norm(transported)
    disc = float(np.linalg.norm(e_comp.A - transported) / ref)
    bound = float(
        3.0
        * (np.linalg.norm(e_comp.stderr) + np.linalg.norm(T.T @ e_base.stderr @ T))
        / ref
    )
    return EquivarianceReport(
        matrix_composed=e_comp.A,
        matrix_transported=transported,
        rel_discrepancy=disc,
        error_bound=bound,
        passed=disc <= max(tol, bound),
    )
