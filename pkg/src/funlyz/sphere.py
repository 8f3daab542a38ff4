"""Direction grids on the unit circle and sphere.

The circle grid is the periodic-trapezoid node set (spectrally accurate for
smooth integrands); the sphere grid is the Fibonacci point set with equal
weights. Both are deterministic in the node count alone.
"""

import math

import numpy as np


def circle_grid(m: int) -> np.ndarray:
    """m equally spaced unit vectors on S^1, starting at angle 0."""
    theta = 2.0 * math.pi * np.arange(m) / m
    return np.column_stack([np.cos(theta), np.sin(theta)])


def fibonacci_sphere(m: int) -> np.ndarray:
    """m quasi-uniform unit vectors on S^2 (Fibonacci lattice)."""
    i = np.arange(m, dtype=np.float64)
    phi = math.pi * (3.0 - math.sqrt(5.0)) * i
    z = 1.0 - (2.0 * i + 1.0) / m
    r = np.sqrt(np.maximum(1.0 - z * z, 0.0))
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


def unit_directions(n: int, m: int) -> np.ndarray:
    if n == 2:
        return circle_grid(m)
    if n == 3:
        return fibonacci_sphere(m)
    raise ValueError(f"direction grids support n in {{2, 3}}, got {n}")
