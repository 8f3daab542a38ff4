"""Closed-form constants used throughout: unit-ball volumes, Gaussian
masses, factorials. Kept in one table so inequality checks never inherit
error from ad-hoc reimplementations."""

import math


def ball_volume(n: int) -> float:
    """Volume of the n-dimensional unit ball, pi^(n/2) / Gamma(n/2 + 1)."""
    return math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0)


def sphere_measure(n: int) -> float:
    """Total (n-1)-dimensional measure of the unit sphere in R^n."""
    return n * ball_volume(n)


def gaussian_mass(n: int) -> float:
    """Mass of exp(-|x|^2/2) over R^n: (2*pi)^(n/2)."""
    return (2.0 * math.pi) ** (n / 2.0)


def gauge_power_mass_factor(n: int, p: float) -> float:
    """Mass of exp(-|x|_K^p / p) divided by the volume of K.

    Radial integration in cone coordinates gives p^(n/p) * Gamma(n/p + 1);
    p = 2 recovers the 2^(n/2) * Gamma(n/2 + 1) factor of the squared-gauge
    Gaussian analogue.
    """
    return p ** (n / p) * math.gamma(n / p + 1.0)


def gamma_fn(x: float) -> float:
    return math.gamma(x)
