"""Refinement study on the L-shape: one coupled solve and error report per level."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .bem.spaces import BemSpace, TraceSpace
from .coupling import DATA_MODES, CoupledSolution, CoupledSystem, assemble_rhs, assemble_system, solve
from .errors import ErrorReport, EocRow, eoc, error_flux_weighted, error_h1_semi, error_l2, error_l2_strip
from .femspace import build_fe_space, trace_restriction
from .manufactured import ManufacturedCase, exact_flux, interior_gradient, interior_value, jump_data
from .mesh import boundary_strip, build_lshape, extract_boundary

log = logging.getLogger(__name__)


@dataclass
class StudyConfig:
    degree: int = 1
    alpha: float = 1.5
    levels: tuple[int, int] = (0, 6)
    data_mode: str = "project-u0"
    quad_order_volume: int = 10
    quad_order_boundary: int = 16
    output: str | None = None
    format: str = "csv"
    dump_mesh: str | None = None
    dump_matrix: str | None = None

    def validate(self) -> None:
        if self.degree not in (1, 2):
            raise ValueError(f"degree must be 1 or 2, got {self.degree}")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        lo, hi = self.levels
        if lo < 0 or hi < lo:
            raise ValueError(f"empty or negative level range {lo}..{hi}")
        if self.data_mode not in DATA_MODES:
            raise ValueError(f"unknown data mode {self.data_mode!r}")
        if self.quad_order_volume < 2 or self.quad_order_boundary < 2:
            raise ValueError("quadrature orders must be >= 2")
        if self.format not in ("csv", "json"):
            raise ValueError(f"unknown format {self.format!r}")

    @property
    def case(self) -> ManufacturedCase:
        return ManufacturedCase(alpha=self.alpha, k_target=self.degree)


@dataclass
class LevelResult:
    report: ErrorReport
    system: CoupledSystem
    solution: CoupledSolution
    extras: dict = field(default_factory=dict)


def solve_level(level: int, degree: int, case: ManufacturedCase, data_mode: str = "project-u0",
                quad_volume: int = 10, quad_boundary: int = 16) -> LevelResult:
    mesh = build_lshape(level)
    bmesh = extract_boundary(mesh)
    fe = build_fe_space(mesh, degree, bmesh)
    T = TraceSpace(bmesh, degree)
    M = BemSpace(bmesh, degree)
    system = assemble_system(fe, trace_restriction(fe, bmesh), T, M)
    data = jump_data(case)
    assemble_rhs(system, data.f, data.u0, data.phi0, data_mode, quad_volume, quad_boundary)
    sol = solve(system)

    def exact(x):
        return interior_value(case, x)

    def grad(x):
        return interior_gradient(case, x)

    def flux(x, n):
        return exact_flux(case, x, n)

    report = ErrorReport(
        level=level,
        h=mesh.h,
        ndof_fem=fe.ndof,
        ndof_bem=M.ndof,
        err_h1=error_h1_semi(fe, sol.u, grad, quad_volume),
        err_l2=error_l2(fe, sol.u, exact, quad_volume),
        err_strip=error_l2_strip(fe, sol.u, exact, boundary_strip(mesh), quad_volume),
        err_flux=error_flux_weighted(M, sol.phi, flux, mesh.h, quad_boundary),
    )
    return LevelResult(report, system, sol)


def run_study(config: StudyConfig) -> tuple[list[ErrorReport], list[EocRow]]:
    """Run all levels in sequence, keeping only one level's system alive at a time."""
    config.validate()
    case = config.case
    reports = []
    lo, hi = config.levels
    for level in range(lo, hi + 1):
        result = solve_level(level, config.degree, case, config.data_mode,
                             config.quad_order_volume, config.quad_order_boundary)
        if config.dump_mesh:
            result.system.fe.mesh.dump(f"{config.dump_mesh}.level{level}.txt")
        if config.dump_matrix:
            result.system.dump_matrix(f"{config.dump_matrix}.level{level}.txt")
        rep = result.report
        log.info("level %d: h1=%.3e l2=%.3e strip=%.3e flux=%.3e (residual %.1e)", level, rep.err_h1,
                 rep.err_l2, rep.err_strip, rep.err_flux, result.solution.diagnostics["relative_residual"])
        reports.append(rep)
        del result
    return reports, eoc(reports)


def quasi_optimality(result: LevelResult, case: ManufacturedCase, quad_volume: int = 10,
                     quad_boundary: int = 16) -> dict:
    """Compare the Galerkin energy error with a best-approximation benchmark.

    Energy error: sqrt(|u - u_h|_{H1}^2 + h ||phi - phi_h||_{L2(Gamma)}^2), the
    weighted flux term standing in for the H^{-1/2} norm. Benchmark: the same
    quantity for the nodal interpolant of u and the L2 projection of phi onto
    the flux space.
    """
    from .bem.boundary_data import l2_project_flux
    from .femspace import interpolate

    system = result.system
    fe, M = system.fe, system.M
    h = fe.mesh.h

    def flux(x, n):
        return exact_flux(case, x, n)

    def grad(x):
        return interior_gradient(case, x)

    galerkin = float(np.hypot(result.report.err_h1, result.report.err_flux))
    u_i = interpolate(fe, lambda x: interior_value(case, x))
    phi_p = l2_project_flux(flux, M, quad_boundary)
    bench = float(np.hypot(error_h1_semi(fe, u_i, grad, quad_volume),
                           error_flux_weighted(M, phi_p, flux, h, quad_boundary)))
    return {"galerkin": galerkin, "benchmark": bench, "ratio": galerkin / bench}
