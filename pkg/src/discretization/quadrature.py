# src/discretization/quadrature.py
"""
Quadrature on triangles via collapsed (conical product) Gauss-Legendre rules.
"""
from functools import lru_cache
from typing import Callable, Tuple

import numpy as np

MAX_DEGREE = 12


@lru_cache(maxsize=None)
def triangle_rule(degree: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Rule on the reference triangle (0,0), (1,0), (0,1), exact for total degree `degree`.

    Returns:
        points: (Q, 2) reference coordinates
        weights: (Q,) weights summing to 1/2
    """
    if not isinstance(degree, (int, np.integer)) or not 1 <= degree <= MAX_DEGREE:
        raise ValueError(f"Unsupported quadrature degree: {degree} (supported 1..{MAX_DEGREE})")

    # the collapse adds one degree in the first direction
    n = (degree + 3) // 2
    nodes, w = np.polynomial.legendre.leggauss(n)
    s = 0.5 * (nodes + 1.0)
    ws = 0.5 * w
    xi, eta = np.meshgrid(s, s, indexing='ij')
    wxi, weta = np.meshgrid(ws, ws, indexing='ij')
    x = xi.ravel()
    y = (eta * (1.0 - xi)).ravel()
    weights = (wxi * weta * (1.0 - xi)).ravel()
    points = np.stack([x, y], axis=1)
    points.setflags(write=False)
    weights.setflags(write=False)
    return points, weights


def barycentric(points: np.ndarray) -> np.ndarray:
    """Barycentric coordinates (Q, 3) of reference points"""
    return np.stack([1.0 - points[:, 0] - points[:, 1], points[:, 0], points[:, 1]], axis=1)


def quadrature_integrate(triangle: np.ndarray, f: Callable, degree: int) -> float:
    """
    Integrate f over a triangle.

    Args:
        triangle: (3, 2) vertex coordinates
        f: vectorized callable f(x, y)
        degree: polynomial degree integrated exactly
    """
    points, weights = triangle_rule(degree)
    tri = np.asarray(triangle, dtype=float)
    xy = barycentric(points) @ tri
    e1 = tri[1] - tri[0]
    e2 = tri[2] - tri[0]
    det = abs(e1[0] * e2[1] - e1[1] * e2[0])
    values = np.broadcast_to(f(xy[:, 0], xy[:, 1]), weights.shape)
    return float(det * np.dot(weights, values))
