"""Exception hierarchy. Callers distinguish input problems (parse,
dimension), analytic degeneracies (non-integrable, non-smooth), and
numerical failures (budget, indefinite results)."""


class FunlyzError(Exception):
    """Base class for all library errors."""


class DimensionMismatchError(FunlyzError):
    """Point or operator dimension does not match the function's."""


class NotProperError(FunlyzError):
    """Convex function with empty effective domain."""


class NonDifferentiableError(FunlyzError):
    """Gradient requested on a kink (e.g. a facet-cone boundary of a
    polytope gauge). Monte Carlo callers respond by resampling."""


class NotIntegrableError(FunlyzError):
    """Mass or variation requested for a log-concave function whose
    potential is not coercive."""


class DegenerateError(FunlyzError):
    """A measure or matrix concentrated on a proper subspace where a
    non-degenerate object is required."""


class VariationError(FunlyzError):
    """First-variation integrand unbounded on the support of the
    surface-area measure."""


class IntegrationError(FunlyzError):
    """Integration backend cannot handle the requested combination."""


class ParseError(FunlyzError):
    """Malformed JSON input; message carries position information."""
