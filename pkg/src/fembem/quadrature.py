"""Gauss rules on the unit interval and the reference triangle."""

from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi


@lru_cache(maxsize=None)
def gauss_line(n: int) -> tuple[np.ndarray, np.ndarray]:
    """n-point Gauss-Legendre rule on [0, 1]; exact for degree 2n - 1."""
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


@lru_cache(maxsize=None)
def gauss_triangle(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Collapsed Gauss rule on the reference triangle {x, y >= 0, x + y <= 1}.

    Gauss-Jacobi(1, 0) in the collapsed direction times Gauss-Legendre in
    the other. Exact for polynomials of total degree ``order``. Returns
    barycentric coordinates of shape (nq, 3) and weights summing to 1/2.
    """
    if order < 1:
        raise ValueError("quadrature order must be positive")
    n = (order + 2) // 2
    a, wa = roots_jacobi(n, 1.0, 0.0)
    a = 0.5 * (a + 1.0)
    wa = 0.25 * wa
    b, wb = gauss_line(n)
    x = a[:, None] * np.ones_like(b)[None, :]
    y = (1.0 - a)[:, None] * b[None, :]
    w = (wa[:, None] * wb[None, :]).ravel()
    x, y = x.ravel(), y.ravel()
    bary = np.column_stack([1.0 - x - y, x, y])
    return bary, w


@lru_cache(maxsize=None)
def graded_line(n: int, layers: int = 12, sigma: float = 0.15) -> tuple[np.ndarray, np.ndarray]:
    """Composite n-point Gauss rule on [0, 1], graded geometrically toward both end points.

    Each half is split at sigma, sigma**2, ..., sigma**layers (measured from
    its end point), so integrands with r**beta behavior at a segment end
    converge without knowing which end is singular.
    """
    g, w = gauss_line(n)
    marks = np.concatenate([[0.0], sigma ** np.arange(layers, 0, -1.0), [1.0]]) * 0.5
    lo, hi = marks[:-1], marks[1:]
    t = (lo[:, None] + (hi - lo)[:, None] * g).ravel()
    wt = ((hi - lo)[:, None] * w).ravel()
    return np.concatenate([t, 1.0 - t[::-1]]), np.concatenate([wt, wt[::-1]])
