"""Finite element engine: DOF management, assembly, sparse algebra, Newton."""

from .assembly import (Assembler, AssemblyError, BoundaryConditions,
                       collect_dirichlet, dirichlet_from_tag)
from .dofmap import DofMap
from .newton import NewtonConfig, NewtonError, NewtonReport, newton_solve
from .sparse import (LinearSolveError, SparseMatrixCSR, apply_dirichlet,
                     linear_solve)

__all__ = [
    "Assembler", "AssemblyError", "BoundaryConditions", "collect_dirichlet",
    "dirichlet_from_tag", "DofMap", "NewtonConfig", "NewtonError",
    "NewtonReport", "newton_solve", "LinearSolveError", "SparseMatrixCSR",
    "apply_dirichlet", "linear_solve",
]
