"""Continuous Lagrange P1/P2 spaces on a TriMesh, volume assembly, traces.

Dof numbering: vertex dofs carry the vertex numbers, P2 edge dofs follow
as ``n_vertices + edge_index`` with edges from :meth:`TriMesh.edges`.
Local P2 dofs per triangle are (v0, v1, v2, e01, e12, e20).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .mesh import BoundaryMesh, TriMesh, extract_boundary
from .quadrature import gauss_triangle

DEFAULT_QUAD_ORDER = 10


@dataclass(frozen=True)
class FeSpace:
    mesh: TriMesh
    degree: int
    cell_dofs: np.ndarray
    dof_coords: np.ndarray
    boundary_dofs: np.ndarray
    # boundary_dofs[k * s + j] is the j-th dof of boundary segment s (counterclockwise)

    @property
    def ndof(self) -> int:
        return len(self.dof_coords)


@dataclass(frozen=True)
class Coefficient:
    """Symmetric positive definite matrix field; ``None`` means the identity."""

    field: Callable[[np.ndarray], np.ndarray] | None = None
    alpha0: float = 1.0

    def __call__(self, x: np.ndarray) -> np.ndarray:
        if self.field is None:
            out = np.zeros(x.shape[:-1] + (2, 2))
            out[..., 0, 0] = out[..., 1, 1] = 1.0
            return out
        values = np.asarray(self.field(x), dtype=float)
        if not np.allclose(values, np.swapaxes(values, -1, -2)):
            raise ValueError("coefficient is not symmetric")
        # smallest eigenvalue of a symmetric 2x2 matrix
        tr = values[..., 0, 0] + values[..., 1, 1]
        det = values[..., 0, 0] * values[..., 1, 1] - values[..., 0, 1] ** 2
        lam_min = 0.5 * tr - np.sqrt(np.maximum(0.25 * tr**2 - det, 0.0))
        if np.any(lam_min < self.alpha0 * (1 - 1e-12)):
            raise ValueError("coefficient violates the ellipticity bound")
        return values


IDENTITY = Coefficient()


@dataclass(frozen=True)
class TraceOperator:
    """Selection of boundary dofs; ``matrix`` has shape (n_trace, n_volume)."""

    indices: np.ndarray
    n_volume: int

    @property
    def matrix(self) -> sp.csr_matrix:
        n = len(self.indices)
        return sp.csr_matrix(
            (np.ones(n), (np.arange(n), self.indices)), shape=(n, self.n_volume)
        )

    def restrict(self, u: np.ndarray) -> np.ndarray:
        return np.asarray(u)[self.indices]

    def extend(self, g: np.ndarray) -> np.ndarray:
        """Extension by zero from trace dofs to volume dofs."""
        out = np.zeros(self.n_volume)
        out[self.indices] = g
        return out


def build_fe_space(mesh: TriMesh, k: int, bmesh: BoundaryMesh | None = None) -> FeSpace:
    if k not in (1, 2):
        raise ValueError(f"unsupported degree {k}")
    if bmesh is None:
        bmesh = extract_boundary(mesh)
    if k == 1:
        return FeSpace(mesh, 1, mesh.triangles.copy(), mesh.vertices.copy(), bmesh.segments[:, 0].copy())

    edges, tri_edges = mesh.edges()
    nv = mesh.n_vertices
    cell_dofs = np.hstack([mesh.triangles, nv + tri_edges])
    coords = np.vstack([mesh.vertices, 0.5 * (mesh.vertices[edges[:, 0]] + mesh.vertices[edges[:, 1]])])
    tri, loc = bmesh.parent_edge[:, 0], bmesh.parent_edge[:, 1]
    mid = nv + tri_edges[tri, loc]
    boundary = np.column_stack([bmesh.segments[:, 0], mid]).ravel()
    return FeSpace(mesh, 2, cell_dofs, coords, boundary)


def shape_functions(k: int, bary: np.ndarray) -> np.ndarray:
    """Values of local basis functions at barycentric points, shape (nq, nloc)."""
    l0, l1, l2 = bary.T
    if k == 1:
        return bary.copy()
    return np.column_stack(
        [l0 * (2 * l0 - 1), l1 * (2 * l1 - 1), l2 * (2 * l2 - 1), 4 * l0 * l1, 4 * l1 * l2, 4 * l2 * l0]
    )


def shape_gradients_bary(k: int, bary: np.ndarray) -> np.ndarray:
    """Derivatives w.r.t. barycentric coordinates, shape (nq, nloc, 3)."""
    nq = len(bary)
    if k == 1:
        return np.broadcast_to(np.eye(3), (nq, 3, 3)).copy()
    l0, l1, l2 = bary.T
    g = np.zeros((nq, 6, 3))
    g[:, 0, 0] = 4 * l0 - 1
    g[:, 1, 1] = 4 * l1 - 1
    g[:, 2, 2] = 4 * l2 - 1
    g[:, 3, 0], g[:, 3, 1] = 4 * l1, 4 * l0
    g[:, 4, 1], g[:, 4, 2] = 4 * l2, 4 * l1
    g[:, 5, 2], g[:, 5, 0] = 4 * l0, 4 * l2
    return g


def _geometry(mesh: TriMesh) -> tuple[np.ndarray, np.ndarray]:
    """Triangle areas and barycentric gradients, shape (nt,) and (nt, 3, 2)."""
    p = mesh.vertices[mesh.triangles]
    e1 = p[:, 1] - p[:, 0]
    e2 = p[:, 2] - p[:, 0]
    det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    # gradients of l1, l2 are the rows of the inverse Jacobian transpose
    g1 = np.column_stack([e2[:, 1], -e2[:, 0]]) / det[:, None]
    g2 = np.column_stack([-e1[:, 1], e1[:, 0]]) / det[:, None]
    grads = np.stack([-g1 - g2, g1, g2], axis=1)
    return 0.5 * det, grads


def quadrature_points(mesh: TriMesh, order: int):
    """Physical quadrature points (nt, nq, 2), weights (nt, nq), barycentrics."""
    bary, w = gauss_triangle(order)
    p = mesh.vertices[mesh.triangles]
    x = np.einsum("qi,tid->tqd", bary, p)
    area, _ = _geometry(mesh)
    return x, 2.0 * area[:, None] * w[None, :], bary


def physical_gradients(space: FeSpace, bary: np.ndarray) -> np.ndarray:
    """Basis gradients, shape (nt, nq, nloc, 2)."""
    _, lam_grads = _geometry(space.mesh)
    gb = shape_gradients_bary(space.degree, bary)
    return np.einsum("qaj,tjd->tqad", gb, lam_grads)


def _scatter(space: FeSpace, local: np.ndarray) -> sp.csr_matrix:
    dofs = space.cell_dofs
    nloc = dofs.shape[1]
    rows = np.repeat(dofs, nloc, axis=1).ravel()
    cols = np.tile(dofs, (1, nloc)).ravel()
    mat = sp.coo_matrix((local.ravel(), (rows, cols)), shape=(space.ndof, space.ndof))
    return mat.tocsr()


def assemble_stiffness(space: FeSpace, coeff: Coefficient = IDENTITY, order: int | None = None) -> sp.csr_matrix:
    """Matrix of a(u, v) = <A grad u, grad v> over the domain."""
    if order is None:
        order = 2 * space.degree + (0 if coeff.field is None else 2)
    x, w, bary = quadrature_points(space.mesh, order)
    grads = physical_gradients(space, bary)
    amat = coeff(x)
    flux = np.einsum("tqde,tqbe->tqbd", amat, grads)
    local = np.einsum("tq,tqad,tqbd->tab", w, grads, flux)
    return _scatter(space, local)


def assemble_mass(space: FeSpace, order: int | None = None) -> sp.csr_matrix:
    order = order or 2 * space.degree
    x, w, bary = quadrature_points(space.mesh, order)
    phi = shape_functions(space.degree, bary)
    local = np.einsum("tq,qa,qb->tab", w, phi, phi)
    return _scatter(space, local)


def assemble_domain_load(space: FeSpace, f: Callable[[np.ndarray], np.ndarray], order: int = DEFAULT_QUAD_ORDER) -> np.ndarray:
    """Vector of <f, phi_i> by triangle-wise Gauss quadrature."""
    x, w, bary = quadrature_points(space.mesh, order)
    phi = shape_functions(space.degree, bary)
    fx = np.asarray(f(x), dtype=float) * np.ones(x.shape[:-1])
    local = np.einsum("tq,tq,qa->ta", w, fx, phi)
    return np.bincount(space.cell_dofs.ravel(), weights=local.ravel(), minlength=space.ndof)


def trace_restriction(space: FeSpace, bmesh: BoundaryMesh) -> TraceOperator:
    if bmesh.vertices.shape != space.mesh.vertices.shape or not np.array_equal(bmesh.vertices, space.mesh.vertices):
        raise ValueError("boundary mesh is not induced by this volume mesh")
    expected = space.degree * bmesh.n_segments
    if len(space.boundary_dofs) != expected or not np.array_equal(
        space.boundary_dofs[:: space.degree], bmesh.segments[:, 0]
    ):
        raise ValueError("boundary mesh does not match the space's boundary dofs")
    return TraceOperator(space.boundary_dofs.copy(), space.ndof)


def evaluate(space: FeSpace, coeffs: np.ndarray, bary: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Values (nt, nq) and gradients (nt, nq, 2) of a discrete function."""
    phi = shape_functions(space.degree, bary)
    local = np.asarray(coeffs)[space.cell_dofs]
    values = local @ phi.T
    grads = np.einsum("ta,tqad->tqd", local, physical_gradients(space, bary))
    return values, grads


def interpolate(space: FeSpace, u: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """Nodal interpolant coefficients of ``u``."""
    return np.asarray(u(space.dof_coords), dtype=float)
