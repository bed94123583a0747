"""Symmetric FEM-BEM coupling for the Laplace transmission problem in 2D.

Volume: conforming Lagrange P1/P2 on a red-refined L-shaped mesh.
Boundary: Galerkin BEM with continuous traces and discontinuous fluxes.
"""

from .coupling import CoupledSolution, CoupledSystem, SolverError, assemble_rhs, assemble_system, solve
from .errors import ErrorReport, EocRow, eoc
from .manufactured import ManufacturedCase, canonical_case, jump_data
from .mesh import BoundaryMesh, ElementSet, MeshError, TriMesh, build_lshape, extract_boundary
from .study import StudyConfig, run_study, solve_level

__version__ = "0.1.0"
