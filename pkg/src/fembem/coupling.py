"""Symmetric FEM-BEM coupling for the Laplace transmission problem.

Find (u_h, phi_h) in V_h x M_h with

    a(u, v) + <D u, v> - b(v, phi) = L1(v)     for all v in V_h
    b(u, psi) + c(phi, psi)        = L2(psi)   for all psi in M_h

where b(u, psi) = <(1/2 - K) u, psi> and c(phi, psi) = <V phi, psi>. The
block matrix is assembled exactly in this (non-symmetric) sign layout.

Data modes. The jump u0 enters only through its L2 projection Pi_h u0 onto
the trace space, so that D and (1/2 - K) act through the assembled
matrices:

    L1(v)   = <f, v> + <phi0 + D Pi_h u0, v>
    L2(psi) = <psi, (1/2 - K) Pi_h u0>

``project-u0`` evaluates <phi0, v> by Gauss quadrature on each segment;
``project-both`` replaces phi0 by its L2 projection onto M_h first. The
consistency errors of the two modes are the only variational crimes; they
are never assembled as separate terms.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .bem.boundary_data import boundary_load, l2_project_flux, l2_project_trace
from .bem.matrices import dlp_matrix, hypersingular_matrix, mass_matrix, slp_matrix
from .bem.spaces import BemSpace, TraceSpace
from .femspace import IDENTITY, Coefficient, FeSpace, TraceOperator, assemble_domain_load, assemble_stiffness, quadrature_points
from .quadrature import graded_line

DATA_MODES = ("project-u0", "project-both")


class SolverError(RuntimeError):
    pass


@dataclass
class CoupledSystem:
    fe: FeSpace
    trace: TraceOperator
    T: TraceSpace
    M: BemSpace
    A: sp.csr_matrix
    D: np.ndarray
    B: np.ndarray
    C: np.ndarray
    rhs1: np.ndarray | None = None
    rhs2: np.ndarray | None = None
    u0h: np.ndarray | None = None

    @property
    def n_fem(self) -> int:
        return self.fe.ndof

    @property
    def n_bem(self) -> int:
        return self.M.ndof

    def matrix(self) -> sp.csc_matrix:
        R = self.trace.matrix
        top_left = self.A + R.T @ sp.csr_matrix(self.D) @ R
        BR = sp.csr_matrix(self.B) @ R
        return sp.bmat([[top_left, -BR.T], [BR, sp.csr_matrix(self.C)]], format="csc")

    def apply(self, u, phi) -> tuple[np.ndarray, np.ndarray]:
        """Left-hand side applied to coefficient vectors (u, phi)."""
        R = self.trace
        ut = R.restrict(u)
        r1 = self.A @ u + R.extend(self.D @ ut) - R.extend(self.B.T @ phi)
        r2 = self.B @ ut + self.C @ phi
        return r1, r2

    def dump_matrix(self, path) -> None:
        """Coordinate text format: one ``row col value`` line per stored entry."""
        coo = self.matrix().tocoo()
        with open(path, "w") as fh:
            for i, j, v in zip(coo.row, coo.col, coo.data):
                fh.write(f"{i} {j} {v:.17g}\n")


@dataclass
class CoupledSolution:
    u: np.ndarray
    phi: np.ndarray
    diagnostics: dict = field(default_factory=dict)


def assemble_system(
    fe: FeSpace,
    trace: TraceOperator,
    T: TraceSpace,
    M: BemSpace,
    coeff: Coefficient = IDENTITY,
    n_gauss: int = 16,
) -> CoupledSystem:
    if len(trace.indices) != T.ndof or trace.n_volume != fe.ndof:
        raise ValueError("trace operator does not match the spaces")
    if T.bmesh.n_segments != M.bmesh.n_segments or M.degree != T.degree - 1:
        raise ValueError("flux space must be the degree k-1 partner of the trace space")
    A = assemble_stiffness(fe, coeff)
    C = slp_matrix(M, n_gauss)
    # the arclength derivative of the trace space lands in M, so V is reused for D
    D = hypersingular_matrix(T, V=C)
    B = dlp_matrix(T, M, n_gauss)
    return CoupledSystem(fe, trace, T, M, A, D, B, C)


def assemble_rhs(
    system: CoupledSystem,
    f,
    u0,
    phi0,
    data_mode: str = "project-u0",
    quad_volume: int = 10,
    quad_boundary: int = 16,
) -> tuple[np.ndarray, np.ndarray]:
    """Fill ``system.rhs1``, ``system.rhs2`` and ``system.u0h``; also return the rhs."""
    if data_mode == "exact-quadrature-u0":
        raise ValueError("D u0 is not computable for non-discrete u0; use a projecting data mode")
    if data_mode not in DATA_MODES:
        raise ValueError(f"unknown data mode {data_mode!r}")
    T, M, R = system.T, system.M, system.trace
    u0h = l2_project_trace(u0, T, quad_boundary)
    if data_mode == "project-u0":
        phi_load = boundary_load(phi0, T, quad_boundary)
    else:
        phi0h = l2_project_flux(phi0, M, quad_boundary)
        phi_load = mass_matrix(M, T).T @ phi0h
    rhs1 = assemble_domain_load(system.fe, f, quad_volume) + R.extend(phi_load + system.D @ u0h)
    rhs2 = system.B @ u0h
    system.rhs1, system.rhs2, system.u0h = rhs1, rhs2, u0h
    return rhs1, rhs2


def solve(system: CoupledSystem, method: str = "direct") -> CoupledSolution:
    """Direct sparse LU of the full block matrix, or elimination of phi via C (``schur``)."""
    if system.rhs1 is None or system.rhs2 is None:
        raise ValueError("right-hand side not assembled")
    n = system.n_fem
    rhs = np.concatenate([system.rhs1, system.rhs2])
    if method == "direct":
        K = system.matrix()
        try:
            lu = spla.splu(K)
        except RuntimeError as exc:
            raise SolverError(f"factorization failed: {exc}") from exc
        x = lu.solve(rhs)
        u, phi = x[:n], x[n:]
        info = {"method": "splu", "nnz_L": lu.L.nnz, "nnz_U": lu.U.nnz}
    elif method == "schur":
        R = system.trace
        try:
            cho = np.linalg.cholesky(system.C)
        except np.linalg.LinAlgError as exc:
            raise SolverError("single layer matrix is not positive definite") from exc

        def c_solve(b):
            return np.linalg.solve(cho.T, np.linalg.solve(cho, b))

        CinvB = c_solve(system.B)
        S = system.D + system.B.T @ CinvB
        Rm = R.matrix
        K = (system.A + Rm.T @ sp.csr_matrix(S) @ Rm).tocsc()
        b = system.rhs1 + R.extend(system.B.T @ c_solve(system.rhs2))
        u = spla.spsolve(K, b)
        phi = c_solve(system.rhs2 - system.B @ R.restrict(u))
        info = {"method": "schur"}
    else:
        raise ValueError(f"unknown solve method {method!r}")

    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(phi))):
        raise SolverError("solution is not finite; the block system is singular")
    r1, r2 = system.apply(u, phi)
    res = np.sqrt(np.sum((r1 - system.rhs1) ** 2) + np.sum((r2 - system.rhs2) ** 2))
    scale = np.linalg.norm(rhs)
    info["residual"] = float(res)
    info["relative_residual"] = float(res / scale) if scale > 0 else float(res)
    return CoupledSolution(u, phi, info)


def check_compatibility(f, phi0, fe: FeSpace, M: BemSpace, quad_volume: int = 10, quad_boundary: int = 16) -> float:
    """<f, 1>_Omega + <phi0, 1>_Gamma by quadrature.

    The boundary rule is graded toward the segment end points: at a corner
    singularity u ~ r**alpha the flux behaves like r**(alpha - 1) there,
    and plain Gauss converges too slowly to resolve the check.
    """
    x, w, _ = quadrature_points(fe.mesh, quad_volume)
    fx = np.asarray(f(x), dtype=float) * np.ones(x.shape[:-1])
    volume = float(np.sum(w * fx))
    bm = M.bmesh
    t, wt = graded_line(quad_boundary)
    xb = bm.points(t)
    nrm = np.broadcast_to(bm.outward_normals[:, None, :], xb.shape)
    gx = np.asarray(phi0(xb, nrm), dtype=float) * np.ones(xb.shape[:-1])
    boundary = float(np.einsum("s,g,sg->", bm.lengths, wt, gx))
    return volume + boundary
