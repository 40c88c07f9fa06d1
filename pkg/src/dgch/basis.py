"""Orthonormal modal basis on the reference triangle.

The basis is obtained by Gram-Schmidt orthonormalisation (a Cholesky
factorisation of the exact monomial Gram matrix) of the monomials
x^a y^b, a + b <= q, ordered by total degree.  Orthonormality is with respect
to the reference measure, so the element mass matrix on a physical triangle
is |det J| times the identity.
"""
from dataclasses import dataclass
from math import factorial

import numpy as np

SUPPORTED_DEGREES = (1, 2, 3)


def local_dimension(q):
    return (q + 1) * (q + 2) // 2


def monomial_exponents(q):
    return [(d - k, k) for d in range(q + 1) for k in range(d + 1)]


def monomial_integral(a, b):
    """Exact integral of x^a y^b over the reference triangle."""
    return factorial(a) * factorial(b) / factorial(a + b + 2)


@dataclass(frozen=True)
class BasisSet:
    """``n`` polynomials phi_i = sum_k coeffs[i, k] x^a_k y^b_k."""

    q: int
    exponents: tuple
    coeffs: np.ndarray

    @property
    def n(self):
        return len(self.exponents)

    def _monomials(self, pts):
        pts = np.atleast_2d(pts)
        x, y = pts[:, 0], pts[:, 1]
        m = np.empty((len(pts), self.n))
        mx = np.zeros_like(m)
        my = np.zeros_like(m)
        for k, (a, b) in enumerate(self.exponents):
            m[:, k] = x**a * y**b
            if a > 0:
                mx[:, k] = a * x ** (a - 1) * y**b
            if b > 0:
                my[:, k] = b * x**a * y ** (b - 1)
        return m, mx, my

    def values(self, pts):
        """Basis values, shape (n_points, n)."""
        m, _, _ = self._monomials(pts)
        return m @ self.coeffs.T

    def gradients(self, pts):
        """Reference gradients, shape (n_points, n, 2)."""
        _, mx, my = self._monomials(pts)
        return np.stack([mx @ self.coeffs.T, my @ self.coeffs.T], axis=-1)


def reference_basis(q: int) -> BasisSet:
    if q not in SUPPORTED_DEGREES:
        raise ValueError(f"unsupported polynomial degree q={q}; expected one of {SUPPORTED_DEGREES}")
    exps = monomial_exponents(q)
    gram = np.array(
        [[monomial_integral(a1 + a2, b1 + b2) for (a2, b2) in exps] for (a1, b1) in exps]
    )
    L = np.linalg.cholesky(gram)
    coeffs = np.linalg.solve(L, np.eye(len(exps)))
    return BasisSet(q, tuple(exps), coeffs)
