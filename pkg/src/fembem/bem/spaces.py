"""Piecewise polynomial spaces on a boundary mesh."""

from __future__ import annotations

import numpy as np

from ..mesh import BoundaryMesh


class BoundarySpace:
    """Nodal Lagrange basis of degree ``degree`` on each boundary segment.

    ``local_dofs[s, a]`` is the global dof of local basis function ``a`` on
    segment ``s``; local basis ``a`` equals ``sum_p mono[p, a] * t**p`` in the
    segment parameter ``t`` in [0, 1].
    """

    continuous: bool

    def __init__(self, bmesh: BoundaryMesh, degree: int, nodes, local_dofs, ndof: int):
        self.bmesh = bmesh
        self.degree = degree
        self.nodes = np.asarray(nodes, dtype=float)
        self.local_dofs = local_dofs
        self.ndof = ndof
        vander = self.nodes[:, None] ** np.arange(degree + 1)[None, :]
        self.mono = np.linalg.inv(vander)

    @property
    def nloc(self) -> int:
        return self.degree + 1

    def basis_values(self, t) -> np.ndarray:
        """Local basis at parameters t, shape (len(t), nloc)."""
        t = np.asarray(t, dtype=float)
        return (t[:, None] ** np.arange(self.degree + 1)[None, :]) @ self.mono

    def evaluate(self, coeffs, t) -> np.ndarray:
        """Function values at parameters t on every segment, shape (n_seg, len(t))."""
        local = np.asarray(coeffs)[self.local_dofs]
        return local @ self.basis_values(t).T

    def monomial_coefficients(self, coeffs) -> np.ndarray:
        """Per-segment monomial coefficients, shape (n_seg, degree + 1)."""
        return np.asarray(coeffs)[self.local_dofs] @ self.mono.T


class TraceSpace(BoundarySpace):
    """Continuous degree-k functions on the closed boundary loop."""

    continuous = True

    def __init__(self, bmesh: BoundaryMesh, k: int):
        if k < 1:
            raise ValueError("trace space degree must be >= 1")
        n = bmesh.n_segments
        ndof = k * n
        local = (k * np.arange(n)[:, None] + np.arange(k + 1)[None, :]) % ndof
        super().__init__(bmesh, k, np.arange(k + 1) / k, local, ndof)


class BemSpace(BoundarySpace):
    """Discontinuous degree-(k-1) functions: the flux space paired with TraceSpace(k)."""

    continuous = False

    def __init__(self, bmesh: BoundaryMesh, k: int):
        if k < 1:
            raise ValueError("flux space needs k >= 1")
        m = k - 1
        nodes = [0.5] if m == 0 else np.arange(m + 1) / m
        n = bmesh.n_segments
        local = np.arange(n * (m + 1)).reshape(n, m + 1)
        super().__init__(bmesh, m, nodes, local, n * (m + 1))
