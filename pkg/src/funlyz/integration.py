"""Numerical integration over R^n and the sphere.

Two backends behind one spec:

* tensor quadrature: Gauss-Legendre product rule on [-R, R]^n after an
  affine standardization that maps the weight's curvature proxy to the
  identity. The error estimate is the difference against a half-resolution
  re-evaluation, which stays honest for kinked integrands where the product
  rule converges only algebraically.
* Monte Carlo: importance sampling from a proposal matched to the weight's
  family but deliberately overdispersed, so every estimate carries genuine
  statistical error (weights with an exact-proposal ratio would otherwise
  return identities by construction). Gaussian-family weights use a linear
  transform of standard normals; gauge-power weights split into a boundary
  (cone-measure) factor and a Gamma radial factor.

Determinism contract: results depend on (backend, budget, radius, seed)
only. Work is split into fixed-size chunks whose random streams derive from
the root seed by stream jumps indexed by chunk number, and all reductions
run over a fixed pairwise tree, so serial and parallel runs agree bitwise.
"""

import hashlib
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Union

import numpy as np

from .bodies import Ellipsoid, Polytope
from .constants import gamma_fn
from .convex import BodyIndicator, GaugePower
from .errors import FunlyzError, IntegrationError, NotIntegrableError
from .kernels import pairwise_sum_cols
from .sphere import unit_directions

CHUNK = 1 << 16
WORKERS = 4
# Proposal overdispersion: Gaussian proposals widen the standard deviation,
# radial proposals widen the Gamma scale. Ratios f/q stay bounded.
GAUSS_OVERDISPERSION = 1.3
RADIAL_OVERDISPERSION = 1.5
# Retry limit for resampling non-differentiable points (measure zero).
RESAMPLE_LIMIT = 50


@dataclass(frozen=True)
class IntegrationSpec:
    """Backend choice plus everything that pins a result bit-for-bit."""

    backend: str = "quadrature"
    budget: int = 200_000
    truncation_radius: float = 8.0
    target_rel_tol: float = 1e-3
    seed: int = 0
    parallel: bool = False

    def __post_init__(self):
        if self.backend not in ("quadrature", "mc"):
            raise FunlyzError(f"unknown backend {self.backend!r}")
        if self.budget < 1:
            raise FunlyzError("budget must be >= 1")
        if self.truncation_radius <= 0:
            raise FunlyzError("truncation radius must be positive")

    @property
    def workers(self) -> int:
        return WORKERS if self.parallel else 1

    def fingerprint(self) -> str:
        payload = json.dumps(
            {
                "backend": self.backend,
                "budget": self.budget,
                "radius": self.truncation_radius,
                "seed": self.seed,
                "workers": self.workers,
            },
            sort_keys=True,
        ).encode()
        return hashlib.sha256(payload).hexdigest()[:16]

    def to_json(self) -> dict:
        return {
            "backend": self.backend,
            "budget": self.budget,
            "radius": self.truncation_radius,
            "tolerance": self.target_rel_tol,
            "seed": self.seed,
            "parallel": self.parallel,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "IntegrationSpec":
        return cls(
            backend=doc.get("backend", "quadrature"),
            budget=int(doc.get("budget", 200_000)),
            truncation_radius=float(doc.get("radius", 8.0)),
            target_rel_tol=float(doc.get("tolerance", 1e-3)),
            seed=int(doc.get("seed", 0)),
            parallel=bool(doc.get("parallel", False)),
        )

    def with_seed(self, seed: int) -> "IntegrationSpec":
        return replace(self, seed=seed)


@dataclass(frozen=True)
class IntegralResult:
    """Estimate with a statistical or resolution-difference error bar."""

    value: Union[float, np.ndarray]
    stderr: Union[float, np.ndarray]
    spec_fingerprint: str
    rejects: int = 0
    tol_met: bool = True

    def __post_init__(self):
        if np.any(np.asarray(self.stderr) < 0):
            raise FunlyzError("error estimate must be nonnegative")


# -- proposals ---------------------------------------------------------------


class _GaussianProposal:
    """N(0, s^2 M^-1) for a weight with log-density x^T M x / 2 + const."""

    def __init__(self, M, s=GAUSS_OVERDISPERSION):
        self.M = np.asarray(M, dtype=np.float64)
        self.n = self.M.shape[0]
        self.s = float(s)
        lam, V = np.linalg.eigh(self.M)
        if lam[0] <= 0:
            raise IntegrationError("proposal needs a positive-definite matrix")
        self._transform = (V * (self.s / np.sqrt(lam))) @ V.T
        self._log_norm = -0.5 * self.n * math.log(2.0 * math.pi * self.s**2) + 0.5 * float(
            np.sum(np.log(lam))
        )

    def draw(self, rng, m):
        return rng.standard_normal((m, self.n)) @ self._transform.T

    def log_density(self, X):
        q = np.einsum("ij,jk,ik->i", X, self.M, X)
        return self._log_norm - 0.5 * q / self.s**2


class _ConeProposal:
    """Radial-times-cone-measure proposal for gauge-power weights.

    A boundary point z follows the normalized cone measure of K (facet
    choice proportional to a_i h_i then uniform in the facet for polytopes;
    the linear image of the uniform sphere for ellipsoids), and the radius
    r = |x|_K follows the Gamma-type law matching exp(-r^p/p) with the
    scale widened by RADIAL_OVERDISPERSION. Lebesgue density:

        q(x) = q_r(|x|_K) / (n V(K) |x|_K^(n-1)).
    """

    def __init__(self, body, p, indicator=False):
        self.body = body
        self.p = float(p)
        self.n = body.dim
        self.indicator = bool(indicator)
        self.volume = body.volume()
        if isinstance(body, Polytope):
            weights = body.areas * body.supports
            self._facet_cdf = np.cumsum(weights) / np.sum(weights)
            self._simplices = body.facet_simplices
        elif isinstance(body, Ellipsoid):
            self._boundary_transform = body.boundary_transform()
        else:
            raise IntegrationError(f"no cone sampler for body {type(body).__name__}")
        if not indicator:
            self._shape = self.n / self.p
            self._scale = RADIAL_OVERDISPERSION
            self._log_norm = gamma_fn(self._shape) * self._scale**self._shape
        else:
            # Uniform-in-K target; radius proposal r = s * u^(1/n).
            self._scale = 1.1

    def _draw_boundary(self, rng, m):
        if isinstance(self.body, Polytope):
            u = rng.random(m)
            idx = np.searchsorted(self._facet_cdf, u, side="right")
            idx = np.minimum(idx, len(self._facet_cdf) - 1)
            simp = self._simplices[idx]
            if self.n == 2:
                lam = rng.random(m)
                return simp[:, 0] + lam[:, None] * (simp[:, 1] - simp[:, 0])
            r1 = np.sqrt(rng.random(m))
            r2 = rng.random(m)
            a = 1.0 - r1
            b = r1 * (1.0 - r2)
            c = r1 * r2
            return (
                a[:, None] * simp[:, 0]
                + b[:, None] * simp[:, 1]
                + c[:, None] * simp[:, 2]
            )
        w = rng.standard_normal((m, self.n))
        w /= np.linalg.norm(w, axis=1, keepdims=True)
        return w @ self._boundary_transform.T

    def draw(self, rng, m):
        z = self._draw_boundary(rng, m)
        if self.indicator:
            r = self._scale * rng.random(m) ** (1.0 / self.n)
        else:
            t = rng.gamma(self._shape, self._scale, size=m)
            r = (self.p * t) ** (1.0 / self.p)
        return r[:, None] * z

    def log_density(self, X):
        r = self.body.gauge_many(X)
        r = np.maximum(r, 1e-300)
        if self.indicator:
            log_qr = np.where(
                r <= self._scale,
                math.log(self.n) + (self.n - 1) * np.log(r) - self.n * math.log(self._scale),
                -np.inf,
            )
        else:
            t = r**self.p / self.p
            log_qr = (
                (self._shape - 1.0) * np.log(t)
                - t / self._scale
                - math.log(self._log_norm)
                + (self.p - 1.0) * np.log(r)
            )
        return log_qr - math.log(self.n * self.volume) - (self.n - 1) * np.log(r)


def _make_proposal(potential):
    M = potential.as_quadratic()
    if M is not None:
        return _GaussianProposal(M)
    if isinstance(potential, GaugePower):
        return _ConeProposal(potential.body, potential.p)
    if isinstance(potential, BodyIndicator):
        return _ConeProposal(potential.body, 1.0, indicator=True)
    raise IntegrationError(
        "no exact Monte Carlo proposal for this potential; use the quadrature backend"
    )


# -- engines -----------------------------------------------------------------


def _map_ordered(jobs, fn, parallel):
    if parallel and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=WORKERS) as ex:
            return list(ex.map(fn, jobs))
    return [fn(j) for j in jobs]


def _reduce_partials(partials):
    """Pairwise-tree reduction of an ordered list of equal-length rows."""
    return pairwise_sum_cols(np.vstack(partials))


def _chunk_sizes(budget):
    sizes = [CHUNK] * (budget // CHUNK)
    if budget % CHUNK:
        sizes.append(budget % CHUNK)
    return sizes


def quadrature_nodes_per_axis(n: int, budget: int) -> int:
    """Per-axis Gauss-Legendre node count: budget^(1/n), forced even so
    the origin never lands on the grid."""
    m = max(2, int(round(budget ** (1.0 / n))))
    return m + m % 2


def _mc_rows(weight, spec, chunk_index, m, need_gradient):
    """One deterministic Monte Carlo chunk: points, importance ratios, and
    (optionally) pushforward gradients with non-smooth rows resampled."""
    potential = weight.potential
    proposal = _make_proposal(potential)
    rng = np.random.Generator(np.random.Philox(key=spec.seed).jumped(chunk_index + 1))
    X = proposal.draw(rng, m)
    rejects = 0
    G = None
    if need_gradient:
        G, ok = potential.gradient_many(X)
        tries = 0
        while not np.all(ok):
            bad = ~ok
            rejects += int(np.sum(bad))
            tries += 1
            if tries > RESAMPLE_LIMIT:
                raise FunlyzError(
                    "repeated non-differentiability while sampling; malformed input"
                )
            Xb = proposal.draw(rng, int(np.sum(bad)))
            Gb, okb = potential.gradient_many(Xb)
            X[bad] = Xb
            G[bad] = Gb
            ok[bad] = okb
    vals, finite = potential.value_many(X)
    logf = np.where(finite, -vals, -np.inf)
    with np.errstate(over="ignore", invalid="ignore"):
        w = np.exp(logf - proposal.log_density(X))
    w = np.where(np.isfinite(w), w, 0.0)
    return X, G, w, rejects


def _quad_axis(m, radius):
    t, w = np.polynomial.legendre.leggauss(m)
    return t * radius, w * radius


def _standardize(potential):
    H = potential.hessian_proxy()
    lam, V = np.linalg.eigh(H)
    if lam[0] <= 0:
        raise IntegrationError("standardization needs a positive-definite proxy")
    S = (V * (1.0 / np.sqrt(lam))) @ V.T
    return S, float(np.prod(1.0 / np.sqrt(lam)))


def _quad_blocks(weight, spec, m, need_gradient):
    """Standardized tensor-product Gauss-Legendre node blocks.

    Yields (X, G, w, rejects) with w already containing the node weight,
    the Jacobian of the standardization, and the weight function value.
    Kinked nodes keep their deterministic subgradient choice and are
    counted rather than moved (fixed nodes cannot be redrawn).
    """
    potential = weight.potential
    n = weight.dim
    if n == 3 and potential.as_quadratic() is None:
        raise IntegrationError(
            "tensor quadrature in n=3 is restricted to Gaussian-family weights; use mc"
        )
    S, detS = _standardize(potential)
    t, w1 = _quad_axis(m, spec.truncation_radius)
    rows_per_block = max(1, CHUNK // (m ** (n - 1)))
    blocks = []
    for start in range(0, m, rows_per_block):
        blocks.append((start, min(start + rows_per_block, m)))

    def make(block):
        lo, hi = block
        if n == 2:
            U = np.stack(
                np.meshgrid(t[lo:hi], t, indexing="ij"), axis=-1
            ).reshape(-1, 2)
            wq = np.outer(w1[lo:hi], w1).ravel()
        else:
            U = np.stack(
                np.meshgrid(t[lo:hi], t, t, indexing="ij"), axis=-1
            ).reshape(-1, 3)
            wq = (
                w1[lo:hi][:, None, None] * w1[None, :, None] * w1[None, None, :]
            ).ravel()
        X = U @ S.T
        vals, finite = potential.value_many(X)
        f = np.where(finite, np.exp(-np.where(finite, vals, 0.0)), 0.0)
        weight_vals = wq * detS * f
        rejects = 0
        G = None
        if need_gradient:
            G, ok = potential.gradient_many(X)
            rejects = int(np.sum(~ok))
        return X, G, weight_vals, rejects

    return blocks, make


def _run_backend(weight, spec, columns, need_gradient):
    """Shared engine: accumulate per-sample column values against the
    weight, with the fixed two-level pairwise reduction."""
    if spec.backend == "mc":
        sizes = _chunk_sizes(spec.budget)

        def job(args):
            ci, m = args
            X, G, w, rejects = _mc_rows(weight, spec, ci, m, need_gradient)
            cols = columns(X, G)
            if cols.ndim == 1:
                cols = cols[:, None]
            v = w[:, None] * cols
            partial = np.concatenate([pairwise_sum_cols(v), pairwise_sum_cols(v * v)])
            return partial, rejects

        parts = _map_ordered(list(enumerate(sizes)), job, spec.parallel)
        rejects = sum(p[1] for p in parts)
        totals = _reduce_partials([p[0] for p in parts])
        k = len(totals) // 2
        N = spec.budget
        mean = totals[:k] / N
        var = np.maximum(totals[k:] / N - mean**2, 0.0)
        stderr = np.sqrt(var / max(N - 1, 1))
        return mean, stderr, rejects

    n = weight.dim
    m = quadrature_nodes_per_axis(n, spec.budget)

    def run_grid(mm):
        blocks, make = _quad_blocks(weight, spec, mm, need_gradient)

        def job(block):
            X, G, wv, rejects = make(block)
            cols = columns(X, G)
            if cols.ndim == 1:
                cols = cols[:, None]
            return pairwise_sum_cols(wv[:, None] * cols), rejects

        parts = _map_ordered(blocks, job, spec.parallel)
        return _reduce_partials([p[0] for p in parts]), sum(p[1] for p in parts)

    value, rejects = run_grid(m)
    coarse, _ = run_grid(max(2, m // 2 + (m // 2) % 2))
    stderr = np.abs(value - coarse)
    return value, stderr, rejects


def _finalize(value, stderr, spec, rejects):
    scale = float(np.max(np.abs(value))) if np.size(value) else 0.0
    tol_met = bool(np.all(np.asarray(stderr) <= spec.target_rel_tol * max(scale, 1e-300)))
    if np.size(value) == 1:
        return IntegralResult(
            float(np.asarray(value).ravel()[0]),
            float(np.asarray(stderr).ravel()[0]),
            spec.fingerprint(),
            rejects,
            tol_met,
        )
    return IntegralResult(value, stderr, spec.fingerprint(), rejects, tol_met)


# -- public operations -------------------------------------------------------


def integrate_rn(integrand, weight, spec: IntegrationSpec) -> IntegralResult:
    """integral of integrand(x) * weight(x) dx over R^n.

    `integrand` maps a batch (m, n) to (m,) or (m, k); None means the
    constant 1 (the total mass of the weight). The weight must be
    integrable; the result is flagged (not raised) when the error estimate
    misses the target tolerance within the budget.
    """
    if not weight.integrable:
        raise NotIntegrableError("weight is not integrable")

    def columns(X, _G):
        if integrand is None:
            return np.ones(len(X))
        return np.asarray(integrand(X), dtype=np.float64)

    value, stderr, rejects = _run_backend(weight, spec, columns, need_gradient=False)
    return _finalize(value, stderr, spec, rejects)


def pushforward_integrate(f, spec: IntegrationSpec, columns) -> IntegralResult:
    """integral of columns(grad phi(x), x) * f(x) dx, i.e. moments of the
    gradient pushforward measure of f."""
    if not f.integrable:
        raise NotIntegrableError("weight is not integrable")

    def cols(X, G):
        return np.asarray(columns(G, X), dtype=np.float64)

    value, stderr, rejects = _run_backend(f, spec, cols, need_gradient=True)
    return _finalize(value, stderr, spec, rejects)


def pushforward_samples(f, spec: IntegrationSpec):
    """Materialized weighted samples (y_i, w_i) of the pushforward measure:
    sum_i w_i g(y_i) estimates integral g d(mu_f). Returns (Y, w, rejects).
    """
    if not f.integrable:
        raise NotIntegrableError("weight is not integrable")
    ys, ws, rejects = [], [], 0
    if spec.backend == "mc":
        for ci, m in enumerate(_chunk_sizes(spec.budget)):
            _X, G, w, rej = _mc_rows(f, spec, ci, m, need_gradient=True)
            ys.append(G)
            ws.append(w / spec.budget)
            rejects += rej
    else:
        m = quadrature_nodes_per_axis(f.dim, spec.budget)
        blocks, make = _quad_blocks(f, spec, m, need_gradient=True)
        for block in blocks:
            _X, G, wv, rej = make(block)
            ys.append(G)
            ws.append(wv)
            rejects += rej
    return np.vstack(ys), np.concatenate(ws), rejects


def pushforward_reduce(f, spec: IntegrationSpec, reducer, size: int):
    """Custom per-chunk reduction over pushforward samples.

    `reducer(Y, w)` maps a chunk of gradient samples and their weights to a
    partial row of length `size`; partials are combined over the fixed
    pairwise tree. Returns (totals, rejects). Weights are normalized so
    totals estimate integrals against mu_f directly.
    """
    if not f.integrable:
        raise NotIntegrableError("weight is not integrable")
    if spec.backend == "mc":
        sizes = _chunk_sizes(spec.budget)

        def job(args):
            ci, m = args
            _X, G, w, rej = _mc_rows(f, spec, ci, m, need_gradient=True)
            return reducer(G, w / spec.budget), rej

        parts = _map_ordered(list(enumerate(sizes)), job, spec.parallel)
        totals = _reduce_partials([p[0] for p in parts])
        return totals, sum(p[1] for p in parts)

    m = quadrature_nodes_per_axis(f.dim, spec.budget)
    blocks, make = _quad_blocks(f, spec, m, need_gradient=True)

    def job(block):
        _X, G, wv, rej = make(block)
        return reducer(G, wv), rej

    parts = _map_ordered(blocks, job, spec.parallel)
    totals = _reduce_partials([p[0] for p in parts])
    return totals, sum(p[1] for p in parts)


def integrate_sphere(integrand, n: int, spec: IntegrationSpec) -> IntegralResult:
    """integral of integrand(u) du over the unit sphere (unnormalized
    measure). n=2 uses the periodic trapezoid rule; n=3 equal-weight
    Fibonacci points. `integrand` maps (m, n) directions to (m,) or (m, k).
    """
    if n not in (2, 3):
        raise IntegrationError("sphere integration supports n in {2, 3}")

    def run(m):
        U = unit_directions(n, m)
        vals = np.asarray(integrand(U), dtype=np.float64)
        if vals.ndim == 1:
            vals = vals[:, None]
        total = 2.0 * math.pi if n == 2 else 4.0 * math.pi
        return pairwise_sum_cols(vals) * (total / m)

    m = max(4, spec.budget)
    value = run(m)
    coarse = run(max(2, m // 2))
    stderr = np.abs(value - coarse)
    return _finalize(value, stderr, spec, 0)
