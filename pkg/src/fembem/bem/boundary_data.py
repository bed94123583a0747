"""L2 projections of boundary data, potentials, and the Calderon residual.

Boundary fields are callables ``g(x, n)`` taking points and outward unit
normals of matching shape (..., 2) and returning values of shape (...).
"""

from __future__ import annotations

import numpy as np
import scipy.sparse.linalg as spla

from ..quadrature import gauss_line
from .matrices import mass_matrix
from .panels import INV_2PI, dlp_moments, log_moments
from .spaces import BemSpace, BoundarySpace, TraceSpace


def boundary_load(g, space: BoundarySpace, n_gauss: int = 16) -> np.ndarray:
    """Vector of <g, basis_i> by per-segment Gauss quadrature."""
    bm = space.bmesh
    t, w = gauss_line(n_gauss)
    x = bm.points(t)
    nrm = np.broadcast_to(bm.outward_normals[:, None, :], x.shape)
    gx = np.asarray(g(x, nrm), dtype=float) * np.ones(x.shape[:-1])
    phi = space.basis_values(t)
    local = np.einsum("s,g,sg,ga->sa", bm.lengths, w, gx, phi)
    return np.bincount(space.local_dofs.ravel(), weights=local.ravel(), minlength=space.ndof)


def l2_project(g, space: BoundarySpace, n_gauss: int = 16) -> np.ndarray:
    rhs = boundary_load(g, space, n_gauss)
    mass = mass_matrix(space, space).tocsc()
    return spla.spsolve(mass, rhs)


def l2_project_trace(g, T: TraceSpace, n_gauss: int = 16) -> np.ndarray:
    return l2_project(g, T, n_gauss)


def l2_project_flux(g, M: BemSpace, n_gauss: int = 16) -> np.ndarray:
    """Segment-local L2 projection onto the discontinuous space."""
    bm = M.bmesh
    rhs = boundary_load(g, M, n_gauss)
    p = np.arange(M.degree + 1)
    ref_mass = M.mono.T @ (1.0 / (p[:, None] + p[None, :] + 1)) @ M.mono
    local_rhs = rhs[M.local_dofs] / bm.lengths[:, None]
    local = np.linalg.solve(ref_mass, local_rhs.T).T
    out = np.empty(M.ndof)
    out[M.local_dofs] = local
    return out


def l2_norm(space: BoundarySpace, coeffs) -> float:
    c = np.asarray(coeffs)
    return float(np.sqrt(c @ (mass_matrix(space, space) @ c)))


def _check_exterior(bmesh, x):
    pts = np.atleast_2d(np.asarray(x, dtype=float))
    a, b = bmesh.starts, bmesh.ends
    d = b - a
    t = np.clip(((pts[:, None, :] - a[None]) * d[None]).sum(-1) / (d * d).sum(-1)[None], 0, 1)
    r = pts[:, None, :] - (a[None] + t[..., None] * d[None])
    if np.any(np.sqrt((r**2).sum(-1)).min(axis=1) <= 0):
        raise ValueError("evaluation point lies on the boundary")
    # the double layer potential of 1 is -1 inside and 0 outside
    P = pts[:, None, :] - a[None]
    winding = INV_2PI * dlp_moments(P, np.broadcast_to(d[None], P.shape),
                                    np.broadcast_to(bmesh.outward_normals[None], P.shape), 0)[..., 0].sum(1)
    if np.any(winding < -0.5):
        raise ValueError("evaluation point lies inside the domain")


def single_layer_potential(M: BoundarySpace, phi, x) -> np.ndarray:
    """(V~ phi)(x) at points x of shape (npts, 2)."""
    bm = M.bmesh
    x = np.atleast_2d(np.asarray(x, dtype=float))
    P = x[:, None, :] - bm.starts[None]
    Q = np.broadcast_to((bm.ends - bm.starts)[None], P.shape)
    mom = log_moments(P, Q, M.degree)
    c = M.monomial_coefficients(phi)
    return -INV_2PI * np.einsum("s,psq,sq->p", bm.lengths, mom, c)


def double_layer_potential(T: BoundarySpace, u, x) -> np.ndarray:
    """(K~ u)(x) = int dG/dn_y(x, y) u(y) dS_y at points x of shape (npts, 2)."""
    bm = T.bmesh
    x = np.atleast_2d(np.asarray(x, dtype=float))
    P = x[:, None, :] - bm.starts[None]
    Q = np.broadcast_to((bm.ends - bm.starts)[None], P.shape)
    N = np.broadcast_to(bm.outward_normals[None], P.shape)
    mom = dlp_moments(P, Q, N, T.degree)
    c = T.monomial_coefficients(u)
    return INV_2PI * np.einsum("psq,sq->p", mom, c)


def eval_exterior_representation(T: TraceSpace, M: BemSpace, u_trace, u0h, phi, x) -> np.ndarray:
    """u_ext(x) = K~(u - u0)(x) - V~ phi(x) for x outside the closed domain."""
    _check_exterior(T.bmesh, x)
    jump = np.asarray(u_trace) - np.asarray(u0h)
    return double_layer_potential(T, jump, x) - single_layer_potential(M, phi, x)


def calderon_residual(g_trace, phi, T: TraceSpace, M: BemSpace, C: np.ndarray, B: np.ndarray) -> float:
    """L2 norm of the projection onto M of V phi + (1/2 - K) g.

    ``g_trace`` and ``phi`` are coefficient vectors in T and M; ``C`` and
    ``B`` the single layer and b(.,.) matrices. The tested residual r_i is
    converted to a function by the inverse M-mass matrix.
    """
    r = C @ np.asarray(phi) + B @ np.asarray(g_trace)
    mass = mass_matrix(M, M).tocsc()
    return float(np.sqrt(max(r @ spla.spsolve(mass, r), 0.0)))
