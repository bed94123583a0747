"""Boundary element spaces, panel integrals and Galerkin operators."""

from .matrices import (dlp_matrix, double_layer_matrix, hypersingular_matrix, mass_matrix,
                       slp_matrix)
from .spaces import BemSpace, BoundarySpace, TraceSpace
