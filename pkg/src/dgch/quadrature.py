"""Quadrature rules on the reference triangle and the unit interval.

Triangle rules are collapsed (Duffy) tensor products of Gauss-Jacobi and
Gauss-Legendre points; they are exact for polynomials of the requested total
degree on the reference triangle with vertices (0, 0), (1, 0), (0, 1).
"""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi

MAX_DEGREE = 40


@dataclass(frozen=True)
class QuadratureRule:
    points: np.ndarray
    weights: np.ndarray
    exact_degree: int

    def __post_init__(self):
        self.points.setflags(write=False)
        self.weights.setflags(write=False)

    @property
    def size(self):
        return len(self.weights)


def _check_degree(degree):
    if degree < 0:
        raise ValueError(f"quadrature degree must be >= 0, got {degree}")
    if degree > MAX_DEGREE:
        raise ValueError(
            f"quadrature degree {degree} not supported (maximum is {MAX_DEGREE})"
        )


@lru_cache(maxsize=None)
def edge_quadrature(degree: int) -> QuadratureRule:
    """Gauss-Legendre rule on [0, 1], exact up to ``degree``."""
    _check_degree(degree)
    n = degree // 2 + 1
    x, w = np.polynomial.legendre.leggauss(n)
    return QuadratureRule(0.5 * (x + 1.0), 0.5 * w, degree)


@lru_cache(maxsize=None)
def triangle_quadrature(degree: int) -> QuadratureRule:
    """Collapsed Gauss rule on the reference triangle, exact up to ``degree``.

    With x = a, y = b (1 - a) the Jacobian (1 - a) is absorbed into a
    Gauss-Jacobi(1, 0) rule in ``a``.
    """
    _check_degree(degree)
    n = degree // 2 + 1
    # roots_jacobi works on [-1, 1] with weight (1 - s)^alpha (1 + s)^beta
    sa, wa = roots_jacobi(n, 1.0, 0.0)
    a = 0.5 * (sa + 1.0)
    wa = wa / 4.0
    sb, wb = np.polynomial.legendre.leggauss(n)
    b = 0.5 * (sb + 1.0)
    wb = 0.5 * wb

    A, B = np.meshgrid(a, b, indexing="ij")
    WA, WB = np.meshgrid(wa, wb, indexing="ij")
    pts = np.column_stack([A.ravel(), (B * (1.0 - A)).ravel()])
    return QuadratureRule(pts, (WA * WB).ravel(), degree)
