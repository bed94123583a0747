"""Dense Galerkin matrices of the Laplace boundary integral operators."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from ..quadrature import gauss_line
from .panels import INV_2PI, PanelPair, _segment_distance, dlp_moments, log_moments, panel_moments, right_normal
from .spaces import BemSpace, BoundarySpace, TraceSpace

_CHUNK = 1 << 21


class ScalingError(ValueError):
    """diam(Omega) >= 1: the single layer operator may lose ellipticity."""


def boundary_diameter(bmesh) -> float:
    p = bmesh.starts
    d = p[:, None, :] - p[None, :, :]
    return float(np.sqrt((d**2).sum(-1)).max())


def pair_moment_blocks(bmesh, pmax: int, qmax: int, kernel: str, n_gauss: int = 16) -> np.ndarray:
    """Monomial moments for all segment pairs, shape (n, n, pmax+1, qmax+1).

    Entry [i, j] has segment i as target and segment j as source.
    """
    xa, xb = bmesh.starts, bmesh.ends
    d = xb - xa
    lengths = np.hypot(d[:, 0], d[:, 1])
    normals = right_normal(d)
    n = len(xa)
    t, w = gauss_line(n_gauss)
    spow = t[:, None] ** np.arange(pmax + 1)[None, :]
    blocks = np.empty((n, n, pmax + 1, qmax + 1))

    rows = max(1, _CHUNK // (n_gauss * n * (qmax + 1)))
    for r0 in range(0, n, rows):
        r1 = min(n, r0 + rows)
        x = xa[r0:r1, None, :] + t[None, :, None] * d[r0:r1, None, :]
        P = x[:, :, None, :] - xa[None, None, :, :]
        Q = np.broadcast_to(d[None, None, :, :], P.shape)
        if kernel == "slp":
            inner = -INV_2PI * lengths[None, None, :, None] * log_moments(P, Q, qmax)
        else:
            N = np.broadcast_to(normals[None, None, :, :], P.shape)
            inner = INV_2PI * dlp_moments(P, Q, N, qmax)
        blocks[r0:r1] = np.einsum("i,g,gp,igjq->ijpq", lengths[r0:r1], w, spow, inner)

    # pairs sharing a vertex, and disjoint pairs too close for plain outer Gauss
    seg = bmesh.segments
    share = (
        (seg[:, None, 0] == seg[None, :, 0])
        | (seg[:, None, 0] == seg[None, :, 1])
        | (seg[:, None, 1] == seg[None, :, 0])
        | (seg[:, None, 1] == seg[None, :, 1])
    )
    dist = _segment_distance(xa[:, None], xb[:, None], xa[None, :], xb[None, :])
    special = share | (dist < 0.5 * lengths[:, None])
    for i, j in zip(*np.nonzero(special)):
        pair = PanelPair.from_points(xa[i], xb[i], xa[j], xb[j])
        blocks[i, j] = panel_moments(pair, pmax, qmax, kernel, n_gauss)
    return blocks


def galerkin(blocks: np.ndarray, test: BoundarySpace, trial: BoundarySpace) -> np.ndarray:
    """Map monomial blocks to the nodal bases and scatter into a dense matrix."""
    local = np.einsum("pa,ijpq,qb->ijab", test.mono, blocks, trial.mono)
    rows = np.broadcast_to(test.local_dofs[:, None, :, None], local.shape)
    cols = np.broadcast_to(trial.local_dofs[None, :, None, :], local.shape)
    flat = (rows * trial.ndof + cols).ravel()
    out = np.bincount(flat, weights=local.ravel(), minlength=test.ndof * trial.ndof)
    return out.reshape(test.ndof, trial.ndof)


def mass_matrix(test: BoundarySpace, trial: BoundarySpace) -> sp.csr_matrix:
    """<phi_b, psi_a> on the boundary, rows = test dofs."""
    bm = test.bmesh
    p = np.arange(test.degree + 1)[:, None]
    q = np.arange(trial.degree + 1)[None, :]
    mono = 1.0 / (p + q + 1)
    local = bm.lengths[:, None, None] * (test.mono.T @ mono @ trial.mono)[None]
    rows = np.broadcast_to(test.local_dofs[:, :, None], local.shape).ravel()
    cols = np.broadcast_to(trial.local_dofs[:, None, :], local.shape).ravel()
    return sp.coo_matrix((local.ravel(), (rows, cols)), shape=(test.ndof, trial.ndof)).tocsr()


def slp_matrix(M: BoundarySpace, n_gauss: int = 16, check_scaling: bool = True) -> np.ndarray:
    """Matrix of c(phi, psi) = <V phi, psi>."""
    if check_scaling:
        diam = boundary_diameter(M.bmesh)
        if diam >= 1.0:
            raise ScalingError(f"diam = {diam:.4g} >= 1; rescale the geometry so that V is elliptic")
    blocks = pair_moment_blocks(M.bmesh, M.degree, M.degree, "slp", n_gauss)
    C = galerkin(blocks, M, M)
    return 0.5 * (C + C.T)


def double_layer_matrix(M: BoundarySpace, T: BoundarySpace, n_gauss: int = 16) -> np.ndarray:
    """Matrix of <K u, psi> with rows psi in M and columns u in T."""
    blocks = pair_moment_blocks(M.bmesh, M.degree, T.degree, "dlp", n_gauss)
    return galerkin(blocks, M, T)


def dlp_matrix(T: TraceSpace, M: BemSpace, n_gauss: int = 16) -> np.ndarray:
    """Matrix of b(u, psi) = <(1/2 - K) u, psi>, rows psi in M, columns u in T."""
    return 0.5 * mass_matrix(M, T).toarray() - double_layer_matrix(M, T, n_gauss)


def derivative_matrix(T: TraceSpace) -> tuple[sp.csr_matrix, BemSpace]:
    """Arclength derivative as a map from T into the discontinuous degree-(k-1) space."""
    k = T.degree
    M = BemSpace(T.bmesh, k)
    # d/dt of t^p is p t^(p-1); then express in M's nodal basis
    dmono = np.zeros((k, k + 1))
    for p in range(1, k + 1):
        dmono[p - 1, p] = p
    local_ref = np.linalg.solve(M.mono, dmono @ T.mono)  # (k, k+1)
    lengths = T.bmesh.lengths
    local = local_ref[None] / lengths[:, None, None]
    rows = np.broadcast_to(M.local_dofs[:, :, None], local.shape).ravel()
    cols = np.broadcast_to(T.local_dofs[:, None, :], local.shape).ravel()
    G = sp.coo_matrix((local.ravel(), (rows, cols)), shape=(M.ndof, T.ndof)).tocsr()
    return G, M


def hypersingular_matrix(T: TraceSpace, V: np.ndarray | None = None, n_gauss: int = 16) -> np.ndarray:
    """Matrix of <D u, v> = <V u', v'> with arclength derivatives u', v'.

    ``V`` may be passed in if the single layer matrix on the degree-(k-1)
    discontinuous space is already assembled.
    """
    G, M = derivative_matrix(T)
    if V is None:
        V = slp_matrix(M, n_gauss)
    Gd = G.toarray()
    D = Gd.T @ V @ Gd
    return 0.5 * (D + D.T)
