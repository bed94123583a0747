"""Triangulations of the L-shaped domain and their boundary meshes.

The coarse mesh covers

    Omega = (-0.2, 0.2) x (0, 0.4) minus [-0.2, 0] x [0, 0.2]

by three 0.2 x 0.2 squares, each split into four triangles through its
center vertex. Vertex numbering at level 0:

    0 (0.0, 0.0)    1 (0.2, 0.0)    2 (0.0, 0.2)    3 (0.2, 0.2)
    4 (-0.2, 0.2)   5 (-0.2, 0.4)   6 (0.0, 0.4)    7 (0.2, 0.4)
    8 (0.1, 0.1)    9 (0.1, 0.3)   10 (-0.1, 0.3)

Red refinement keeps all parent vertices with their numbers and appends
one midpoint per parent edge, edges ordered lexicographically by their
sorted vertex pair. Midpoints of dyadic coordinates are exact in binary
floating point, so no coordinate deduplication is needed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

LSHAPE_AREA = 0.12
LSHAPE_PERIMETER = 1.6
LSHAPE_CORNERS = np.array(
    [[0.0, 0.0], [0.2, 0.0], [0.2, 0.4], [-0.2, 0.4], [-0.2, 0.2], [0.0, 0.2]]
)

_COARSE_VERTICES = np.array(
    [
        [0.0, 0.0],
        [0.2, 0.0],
        [0.0, 0.2],
        [0.2, 0.2],
        [-0.2, 0.2],
        [-0.2, 0.4],
        [0.0, 0.4],
        [0.2, 0.4],
        [0.1, 0.1],
        [0.1, 0.3],
        [-0.1, 0.3],
    ]
)

_COARSE_TRIANGLES = np.array(
    [
        # square [0, 0.2] x [0, 0.2], center 8
        [0, 1, 8],
        [1, 3, 8],
        [3, 2, 8],
        [2, 0, 8],
        # square [0, 0.2] x [0.2, 0.4], center 9
        [2, 3, 9],
        [3, 7, 9],
        [7, 6, 9],
        [6, 2, 9],
        # square [-0.2, 0] x [0.2, 0.4], center 10
        [4, 2, 10],
        [2, 6, 10],
        [6, 5, 10],
        [5, 4, 10],
    ]
)


class MeshError(ValueError):
    pass


@dataclass(frozen=True)
class TriMesh:
    """Conforming affine triangulation with counterclockwise triangles."""

    vertices: np.ndarray
    triangles: np.ndarray
    level: int = 0
    h: float = 0.2

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    def signed_areas(self) -> np.ndarray:
        p = self.vertices[self.triangles]
        e1 = p[:, 1] - p[:, 0]
        e2 = p[:, 2] - p[:, 0]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    def diameters(self) -> np.ndarray:
        p = self.vertices[self.triangles]
        lengths = np.linalg.norm(p - np.roll(p, -1, axis=1), axis=2)
        return lengths.max(axis=1)

    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        """Unique edges and the triangle-to-edge map.

        Returns ``(edges, tri_edges)``; ``edges`` holds sorted vertex pairs in
        lexicographic order and ``tri_edges[t, i]`` is the edge from local
        vertex ``i`` to local vertex ``(i + 1) % 3``.
        """
        t = self.triangles
        local = np.stack([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]], axis=1)
        flat = np.sort(local.reshape(-1, 2), axis=1)
        edges, inverse = np.unique(flat, axis=0, return_inverse=True)
        return edges, inverse.reshape(-1, 3)

    def dump(self, path) -> None:
        """Write ``v x y`` and ``t i j k`` lines (0-based indices)."""
        with open(path, "w") as fh:
            for x, y in self.vertices:
                fh.write(f"v {x:.17g} {y:.17g}\n")
            for i, j, k in self.triangles:
                fh.write(f"t {i} {j} {k}\n")


@dataclass(frozen=True)
class BoundaryMesh:
    """Closed counterclockwise boundary polyline induced by a TriMesh.

    ``segments[s] = (a, b)`` are volume vertex indices with segment ``s``
    running from ``a`` to ``b``; consecutive segments share endpoints and
    the last one closes the loop. Normals point out of the domain.
    """

    vertices: np.ndarray
    segments: np.ndarray
    outward_normals: np.ndarray
    parent_edge: np.ndarray
    corner_flags: np.ndarray
    h: float = 0.2

    @property
    def n_segments(self) -> int:
        return len(self.segments)

    @property
    def starts(self) -> np.ndarray:
        return self.vertices[self.segments[:, 0]]

    @property
    def ends(self) -> np.ndarray:
        return self.vertices[self.segments[:, 1]]

    @property
    def lengths(self) -> np.ndarray:
        return np.linalg.norm(self.ends - self.starts, axis=1)

    @property
    def tangents(self) -> np.ndarray:
        d = self.ends - self.starts
        return d / np.linalg.norm(d, axis=1)[:, None]

    def points(self, s) -> np.ndarray:
        """Map local parameters ``s`` in [0, 1] to points on every segment.

        Returns an array of shape ``(n_segments, len(s), 2)``.
        """
        s = np.asarray(s, dtype=float)
        a = self.starts[:, None, :]
        return a + s[None, :, None] * (self.ends - self.starts)[:, None, :]


@dataclass(frozen=True)
class ElementSet:
    indices: np.ndarray
    role: str = ""

    def __post_init__(self):
        idx = np.asarray(self.indices)
        if len(np.unique(idx)) != len(idx):
            raise ValueError("duplicate element indices")

    def __len__(self) -> int:
        return len(self.indices)


def build_lshape(level: int = 0) -> TriMesh:
    """L-shaped mesh after ``level`` uniform red refinements."""
    if level < 0:
        raise ValueError("level must be non-negative")
    mesh = TriMesh(_COARSE_VERTICES.copy(), _COARSE_TRIANGLES.copy(), 0, 0.2)
    for _ in range(level):
        mesh = red_refine(mesh)
    return mesh


def red_refine(mesh: TriMesh) -> TriMesh:
    """Split every triangle into four congruent children via edge midpoints."""
    edges, tri_edges = mesh.edges()
    nv = mesh.n_vertices
    midpoints = 0.5 * (mesh.vertices[edges[:, 0]] + mesh.vertices[edges[:, 1]])
    vertices = np.vstack([mesh.vertices, midpoints])

    t = mesh.triangles
    m01 = nv + tri_edges[:, 0]
    m12 = nv + tri_edges[:, 1]
    m20 = nv + tri_edges[:, 2]
    children = np.stack(
        [
            np.column_stack([t[:, 0], m01, m20]),
            np.column_stack([m01, t[:, 1], m12]),
            np.column_stack([m20, m12, t[:, 2]]),
            np.column_stack([m01, m12, m20]),
        ],
        axis=1,
    ).reshape(-1, 3)
    return TriMesh(vertices, children, mesh.level + 1, 0.5 * mesh.h)


def _boundary_edges(mesh: TriMesh) -> tuple[np.ndarray, np.ndarray]:
    """Directed boundary edges (as in their triangle) and parent (tri, local)."""
    t = mesh.triangles
    directed = np.stack([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]], axis=1).reshape(-1, 2)
    key = np.sort(directed, axis=1)
    _, inverse, counts = np.unique(key, axis=0, return_inverse=True, return_counts=True)
    on_boundary = counts[inverse.ravel()] == 1
    idx = np.flatnonzero(on_boundary)
    parents = np.column_stack([idx // 3, idx % 3])
    return directed[idx], parents


def extract_boundary(mesh: TriMesh) -> BoundaryMesh:
    """Ordered boundary loop of ``mesh``, starting at the vertex nearest the origin.

    Boundary edges of counterclockwise triangles already run counterclockwise
    around the domain, so chaining them head-to-tail gives the loop.
    """
    directed, parents = _boundary_edges(mesh)
    nxt = {}
    for k, (a, b) in enumerate(directed):
        if a in nxt:
            raise MeshError("boundary is not a simple closed loop")
        nxt[a] = k
    start_vertex = min(nxt, key=lambda v: (np.hypot(*mesh.vertices[v]), v))
    order = []
    v = start_vertex
    for _ in range(len(directed)):
        if v not in nxt:
            raise MeshError("boundary chain is broken")
        k = nxt[v]
        order.append(k)
        v = directed[k, 1]
        if v == start_vertex:
            break
    if len(order) != len(directed) or v != start_vertex:
        raise MeshError("boundary is not a single closed loop")

    segments = directed[order]
    d = mesh.vertices[segments[:, 1]] - mesh.vertices[segments[:, 0]]
    normals = np.column_stack([d[:, 1], -d[:, 0]]) / np.linalg.norm(d, axis=1)[:, None]

    # a loop vertex is a corner when the incoming and outgoing directions differ
    prev = np.roll(d, 1, axis=0)
    cross = prev[:, 0] * d[:, 1] - prev[:, 1] * d[:, 0]
    corner = np.abs(cross) > 1e-12 * np.linalg.norm(prev, axis=1) * np.linalg.norm(d, axis=1)
    corner_flags = np.zeros(mesh.n_vertices, dtype=bool)
    corner_flags[segments[corner, 0]] = True

    return BoundaryMesh(
        vertices=mesh.vertices,
        segments=segments,
        outward_normals=normals,
        parent_edge=parents[order],
        corner_flags=corner_flags,
        h=mesh.h,
    )


def boundary_strip(mesh: TriMesh) -> ElementSet:
    """Triangles whose closure touches the boundary."""
    directed, _ = _boundary_edges(mesh)
    on_gamma = np.zeros(mesh.n_vertices, dtype=bool)
    on_gamma[directed.ravel()] = True
    touching = on_gamma[mesh.triangles].any(axis=1)
    return ElementSet(np.flatnonzero(touching), role="boundary strip")


def load_mesh(path) -> TriMesh:
    """Read the ``v``/``t`` text format written by :meth:`TriMesh.dump`."""
    verts, tris = [], []
    with open(path) as fh:
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "v":
                verts.append([float(parts[1]), float(parts[2])])
            elif parts[0] == "t":
                tris.append([int(p) for p in parts[1:4]])
    vertices = np.array(verts, dtype=float)
    triangles = np.array(tris, dtype=int)
    p = vertices[triangles]
    h = float(np.linalg.norm(p - np.roll(p, -1, axis=1), axis=2).max())
    return TriMesh(vertices, triangles, 0, h)
