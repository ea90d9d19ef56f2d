"""Global DOF numbering: three displacement components per mesh node."""

from __future__ import annotations

import numpy as np

__all__ = ["DofMap"]


class DofMap:
    """Node-major numbering: DOF of (node, component) is 3*node + component."""

    def __init__(self, mesh):
        self.mesh = mesh
        self.n_dofs = 3 * mesh.n_vertices
        n = mesh.cells.shape[1]
        cd = np.empty((mesh.n_cells, 3 * n), dtype=np.int64)
        for a in range(n):
            base = 3 * mesh.cells[:, a]
            cd[:, 3 * a] = base
            cd[:, 3 * a + 1] = base + 1
            cd[:, 3 * a + 2] = base + 2
        self.cell_dofs = cd

    def dof(self, node: int, component: int) -> int:
        if not 0 <= node < self.mesh.n_vertices:
            raise IndexError(
                f"node {node} out of range [0, {self.mesh.n_vertices})")
        if not 0 <= component < 3:
            raise IndexError(f"component {component} out of range [0, 3)")
        return 3 * node + component

    def as_vectors(self, u: np.ndarray) -> np.ndarray:
        """View a DOF vector as (n_vertices, 3) displacements."""
        return np.asarray(u).reshape(self.mesh.n_vertices, 3)
