"""Unfitted mixed finite elements for elliptic interface problems.

A background box mesh carries the global solution, an independent mesh
of the immersed region carries a correction field, and a piecewise
constant Lagrange multiplier ties the two together. The coupling terms
are integrated on exact polygon intersections of the two meshes, so
neither mesh needs to fit the interface.
"""

from .coupling import CouplingTable, CoverageError, assemble_C1, assemble_C2, build_intersections
from .element import P0, Q1, Q1B, Q2, CellMap, gauss_square, gauss_triangle
from .geometry import clip_convex, fan_triangulate, signed_area
from .infsup import InfSupReport, infsup_constant, infsup_sweep
from .mesh import DomainSpec, QuadMesh, build_mesh, refine_uniform
from .runner import run_study, solve_level
from .space import DirichletBC, FeSpace, build_space, dirichlet_bc, evaluate, interpolate
from .system import (
    BlockSystem,
    SolutionTriple,
    SolverError,
    apply_dirichlet,
    error_norms,
    full_matrix,
    multiplier_error,
    solve_saddle,
)

__version__ = "0.1.0"

__all__ = [
    "CouplingTable",
    "CoverageError",
    "assemble_C1",
    "assemble_C2",
    "build_intersections",
    "P0",
    "Q1",
    "Q1B",
    "Q2",
    "CellMap",
    "gauss_square",
    "gauss_triangle",
    "clip_convex",
    "fan_triangulate",
    "signed_area",
    "InfSupReport",
    "infsup_constant",
    "infsup_sweep",
    "DomainSpec",
    "QuadMesh",
    "build_mesh",
    "refine_uniform",
    "run_study",
    "solve_level",
    "DirichletBC",
    "FeSpace",
    "build_space",
    "dirichlet_bc",
    "evaluate",
    "interpolate",
    "BlockSystem",
    "SolutionTriple",
    "SolverError",
    "apply_dirichlet",
    "error_norms",
    "full_matrix",
    "multiplier_error",
    "solve_saddle",
]
