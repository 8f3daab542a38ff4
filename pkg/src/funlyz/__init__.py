"""funlyz: LYZ ellipsoids of log-concave functions.

Convex-conjugate algebra, log-concave Minkowski combinations, surface-area
(gradient-pushforward) measures, the quadratic-form ellipsoid functional
with its GL(n) equivariance, optimal-Gaussian solvers, projection
functionals with the two-sided isoperimetric chain, and a verification
battery behind a CLI.
"""

from .bodies import (
    Ball,
    ConvexBody,
    Ellipsoid,
    Polytope,
    QuadraticForm,
    Zonotope,
    cube,
    lyz_body_matrix,
    projection_body,
    regular_polygon,
    square,
)
from .convex import (
    ConvexFunction,
    ExtendedReal,
    GaugePower,
    Quadratic,
    SampledGrid,
    fenchel_young_gap,
    gauge_power,
    inf_convolution,
    quadratic,
    scalar_left_mult,
    scalar_right_mult,
)
from .ellipsoid import (
    FunctionalEllipsoid,
    check_equivariance,
    evaluate_gamma,
    lyz_matrix,
    support_of_polar,
)
from .integration import (
    IntegralResult,
    IntegrationSpec,
    integrate_rn,
    integrate_sphere,
    pushforward_integrate,
    pushforward_samples,
)
from .kernels import KERNELS_BACKEND
from .logconcave import (
    GaussianFunction,
    LogConcaveFunction,
    first_variation,
    minkowski_combine,
    normalized_first_variation,
    polar_function,
    scale_log_concave,
    standard_gaussian,
    support_function,
    total_mass,
    variation_difference_quotient,
)

__version__ = "0.1.0"
