"""Minimal deterministic SVG output for 2-D diagnostics.

Hand-written markup (no raster dependencies): level sets of the output
Gaussian-type function exp(-x^T A x), and polar profiles of projection
support functions. Numbers are formatted to fixed precision so identical
inputs give byte-identical files.
"""

import math

import numpy as np

_SIZE = 480
_SAMPLES = 256


def _fmt(x: float) -> str:
    return f"{x:.4f}"


def _polyline(points, extent):
    scale = (_SIZE / 2 - 20) / extent
    coords = " ".join(
        f"{_fmt(_SIZE / 2 + scale * x)},{_fmt(_SIZE / 2 - scale * y)}" for x, y in points
    )
    return coords


def _frame(body: str) -> str:
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_SIZE}" height="{_SIZE}" '
        f'viewBox="0 0 {_SIZE} {_SIZE}">\n'
        f'<rect width="{_SIZE}" height="{_SIZE}" fill="white"/>\n'
        f'<line x1="0" y1="{_SIZE // 2}" x2="{_SIZE}" y2="{_SIZE // 2}" stroke="#ccc"/>\n'
        f'<line x1="{_SIZE // 2}" y1="0" x2="{_SIZE // 2}" y2="{_SIZE}" stroke="#ccc"/>\n'
        f"{body}</svg>\n"
    )


def ellipse_level_sets_svg(A, levels=(0.5, 2.0)) -> str:
    """Level sets of exp(-x^T A x) at exp(-c) for c in `levels`: the
    ellipses x^T A x = c."""
    A = np.asarray(A, dtype=np.float64)
    theta = 2.0 * math.pi * np.arange(_SAMPLES + 1) / _SAMPLES
    U = np.column_stack([np.cos(theta), np.sin(theta)])
    q = np.einsum("ij,jk,ik->i", U, A, U)
    extent = float(np.sqrt(max(levels) / np.min(q))) * 1.1
    parts = []
    for c, color in zip(levels, ("#1f6fb2", "#b23a1f", "#3ab21f", "#b21f8e")):
        r = np.sqrt(c / q)
        pts = U * r[:, None]
        parts.append(
            f'<polyline fill="none" stroke="{color}" stroke-width="1.5" '
            f'points="{_polyline(pts, extent)}"/>\n'
        )
    return _frame("".join(parts))


def polar_profile_svg(directions, values) -> str:
    """Closed polar curve r(theta) = h(u(theta)) for a spherical profile."""
    directions = np.asarray(directions, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    pts = directions * values[:, None]
    pts = np.vstack([pts, pts[:1]])
    extent = float(np.max(values)) * 1.1
    body = (
        f'<polyline fill="none" stroke="#1f6fb2" stroke-width="1.5" '
        f'points="{_polyline(pts, extent)}"/>\n'
    )
    return _frame(body)
