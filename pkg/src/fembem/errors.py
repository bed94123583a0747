"""Error norms of a coupled solution and observed orders of convergence."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .bem.spaces import BoundarySpace
from .femspace import FeSpace, evaluate, quadrature_points
from .mesh import ElementSet
from .quadrature import gauss_line

ERROR_COLUMNS = ("err_h1", "err_l2", "err_strip", "err_flux")


@dataclass
class ErrorReport:
    level: int
    h: float
    ndof_fem: int
    ndof_bem: int
    err_h1: float
    err_l2: float
    err_strip: float
    err_flux: float

    def __post_init__(self):
        # plain Python scalars so reports serialize identically everywhere
        for name in ("level", "ndof_fem", "ndof_bem"):
            setattr(self, name, int(getattr(self, name)))
        for name in ("h",) + ERROR_COLUMNS:
            setattr(self, name, float(getattr(self, name)))

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class EocRow:
    from_level: int
    to_level: int
    values: dict  # column -> observed order, None where undefined


def error_l2(space: FeSpace, u_h, exact, quad_order: int = 10, elements=None) -> float:
    """||u - u_h||_{L2} over all triangles, or over ``elements`` if given."""
    x, w, bary = quadrature_points(space.mesh, quad_order)
    vals, _ = evaluate(space, u_h, bary)
    diff2 = (exact(x) - vals) ** 2 * w
    if elements is not None:
        diff2 = diff2[np.asarray(elements)]
    return float(np.sqrt(diff2.sum()))


def error_h1_semi(space: FeSpace, u_h, exact_grad, quad_order: int = 10, elements=None) -> float:
    """||grad(u - u_h)||_{L2}."""
    x, w, bary = quadrature_points(space.mesh, quad_order)
    _, grads = evaluate(space, u_h, bary)
    diff2 = ((exact_grad(x) - grads) ** 2).sum(-1) * w
    if elements is not None:
        diff2 = diff2[np.asarray(elements)]
    return float(np.sqrt(diff2.sum()))


def error_l2_strip(space: FeSpace, u_h, exact, strip: ElementSet, quad_order: int = 10) -> float:
    return error_l2(space, u_h, exact, quad_order, elements=strip.indices)


def error_flux_weighted(M: BoundarySpace, phi_h, exact_flux, h: float, n_gauss: int = 16) -> float:
    """h^(1/2) ||phi - phi_h||_{L2(Gamma)} with the global mesh size h.

    ``exact_flux(x, n)`` is evaluated at segment Gauss points with the
    owning segment's outward normal.
    """
    bm = M.bmesh
    t, w = gauss_line(n_gauss)
    x = bm.points(t)
    nrm = np.broadcast_to(bm.outward_normals[:, None, :], x.shape)
    diff = exact_flux(x, nrm) - M.evaluate(phi_h, t)
    l2 = np.sqrt(np.einsum("s,g,sg->", bm.lengths, w, diff**2))
    return float(math.sqrt(h) * l2)


def eoc(reports: list[ErrorReport], columns=ERROR_COLUMNS) -> list[EocRow]:
    """Observed orders log(e_l / e_{l+1}) / log(h_l / h_{l+1}) for consecutive reports."""
    rows = []
    for a, b in zip(reports, reports[1:]):
        values = {}
        for col in columns:
            ea, eb = getattr(a, col), getattr(b, col)
            if ea > 0 and eb > 0 and a.h != b.h and np.isfinite(ea) and np.isfinite(eb):
                values[col] = math.log(ea / eb) / math.log(a.h / b.h)
            else:
                values[col] = None
        rows.append(EocRow(a.level, b.level, values))
    return rows
