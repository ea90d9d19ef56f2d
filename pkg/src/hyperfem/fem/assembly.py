"""Residual, Jacobian and energy assembly over a mesh (total Lagrangian).

The Assembler precomputes everything u-independent once per mesh: physical
shape-function gradients and weights at volume quadrature points, facet
integration tables per boundary tag, and the CSR sparsity pattern with a
scatter map.  Per solve, only the deformation gradients, the material tape
evaluation and the local-to-global contractions remain.

Per element, F = I + sum_a u_a (x) gradN_a; the internal force contracts
the first Piola-Kirchhoff stress with the gradients and the tangent block
contracts the 81-component derivative dP/dF, which carries both material
and geometric stiffness.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import _accel
from ..elements import InvertedElementError, element, quadrature, tabulate
from .dofmap import DofMap
from .sparse import SparseMatrixCSR

__all__ = ["BoundaryConditions", "Assembler", "AssemblyError",
           "dirichlet_from_tag", "collect_dirichlet"]

# elements per kernel-evaluation chunk are sized to keep scratch buffers
# around this many quadrature points (scratch is n_slots x points doubles)
_CHUNK_POINTS = 2048


class AssemblyError(RuntimeError):
    pass


@dataclass
class BoundaryConditions:
    """Dirichlet pins, dead-load tractions by facet tag, and body force.

    dirichlet: list of (node, component, value [m])
    neumann: list of (facet tag name, traction vector [Pa], reference area)
    body_force: (3,) vector [Pa/m^3], or a callable x(N,3) -> (N,3), or None
    """
    dirichlet: list = field(default_factory=list)
    neumann: list = field(default_factory=list)
    body_force: object = None


def dirichlet_from_tag(mesh, tag: str, value=(0.0, 0.0, 0.0)):
    """Pin every node of every facet carrying ``tag`` to ``value``."""
    nodes = np.unique(mesh.facets_with_tag(tag))
    return [(int(n), c, float(value[c])) for n in nodes for c in range(3)]


def collect_dirichlet(bc: BoundaryConditions, n_vertices: int):
    """Validate and flatten Dirichlet entries into (dofs, values)."""
    seen = {}
    for node, comp, value in bc.dirichlet:
        if not 0 <= node < n_vertices:
            raise AssemblyError(
                f"Dirichlet constraint on nonexistent node {node} "
                f"(mesh has {n_vertices})")
        if not 0 <= comp < 3:
            raise AssemblyError(f"Dirichlet component {comp} out of range")
        key = 3 * node + comp
        if key in seen and seen[key] != value:
            raise AssemblyError(
                f"conflicting Dirichlet values for node {node} component {comp}")
        seen[key] = value
    dofs = np.array(sorted(seen), dtype=np.int64)
    values = np.array([seen[d] for d in dofs], dtype=np.float64)
    return dofs, values


class Assembler:
    """Precomputed integration tables and sparsity for one mesh."""

    def __init__(self, mesh, quad_degree: int | None = None):
        self.mesh = mesh
        self.dofmap = DofMap(mesh)
        el = element(mesh.family)
        self.element = el
        rule = quadrature(el, quad_degree)
        self.rule = rule

        vals, grads = tabulate(el, rule.points)      # (Q,n), (Q,n,3)
        coords = mesh.vertices[mesh.cells]           # (E,n,3)
        J = np.einsum("enk,qnl->eqkl", coords, grads)
        detJ = np.linalg.det(J)                      # (E,Q)
        bad = np.nonzero(detJ.min(axis=1) <= 0.0)[0]
        if len(bad):
            e = int(bad[0])
            raise InvertedElementError(float(detJ[e].min()), e)
        Jinv = np.linalg.inv(J)
        self.gradN_x = np.einsum("qnl,eqlk->eqnk", grads, Jinv)  # (E,Q,n,3)
        self.wdet = rule.weights[None, :] * detJ                 # (E,Q)
        self.shape_vals = vals
        self.points_x = np.einsum("qn,enk->eqk", vals, coords)   # (E,Q,3)

        self._facet_tables = {}
        self._pattern = None
        self._scratch = {}

    # --- facet tables ---------------------------------------------------

    def _facet_table(self, tag: str):
        got = self._facet_tables.get(tag)
        if got is not None:
            return got
        mesh = self.mesh
        facets = mesh.facets_with_tag(tag)
        ffam = element(self.element.facet_family)
        rule = quadrature(ffam, min(self.rule.degree, 4))
        vals, grads = tabulate(ffam, rule.points)    # (Qf,m), (Qf,m,2)
        coords = mesh.vertices[facets]               # (F,m,3)
        J = np.einsum("fmk,qml->fqkl", coords, grads)  # (F,Qf,3,2)
        cr = np.cross(J[..., 0], J[..., 1])
        area = np.linalg.norm(cr, axis=-1)           # (F,Qf)
        warea = rule.weights[None, :] * area
        xq = np.einsum("qm,fmk->fqk", vals, coords)  # (F,Qf,3)
        fdofs = np.empty((len(facets), 3 * facets.shape[1]), dtype=np.int64)
        for a in range(facets.shape[1]):
            base = 3 * facets[:, a]
            for c in range(3):
                fdofs[:, 3 * a + c] = base + c
        table = (vals, warea, xq, fdofs)
        self._facet_tables[tag] = table
        return table

    def boundary_area(self, tag: str) -> float:
        _, warea, _, _ = self._facet_table(tag)
        return float(warea.sum())

    def domain_volume(self) -> float:
        return float(self.wdet.sum())

    # --- deformation gradients and kernel sweeps -------------------------

    def _chunks(self):
        E = self.mesh.n_cells
        Q = self.rule.n_points
        step = max(1, _CHUNK_POINTS // max(Q, 1))
        for lo in range(0, E, step):
            yield lo, min(lo + step, E)

    def _deformation_gradients(self, u, lo, hi):
        cd = self.dofmap.cell_dofs[lo:hi]
        ucell = u[cd].reshape(hi - lo, -1, 3)        # (e,n,3)
        F = np.einsum("eni,eqnk->eqik", ucell, self.gradN_x[lo:hi])
        F += np.eye(3)[None, None]
        return F

    def _eval_kernel(self, material, F, lo):
        """Evaluate (psi,P,A) on a chunk, mapping domain errors to elements."""
        e, q = F.shape[:2]
        flat = F.reshape(e * q, 9)
        if material.requires_positive_det:
            det = np.linalg.det(F).reshape(e, q)
            bad = np.nonzero(det.min(axis=1) <= 0.0)[0]
            if len(bad):
                eid = lo + int(bad[0])
                raise InvertedElementError(float(det[bad[0]].min()), eid)
        key = (id(material), e * q)
        scratch = self._scratch.get(key)
        if scratch is None:
            scratch = material.new_scratch(e * q)
            self._scratch[key] = scratch
        try:
            psi, P, A = material.eval_batch(flat, scratch)
        except _accel.KernelDomainError as err:
            raise AssemblyError(
                f"kernel domain violation in elements [{lo}, {lo + e}): {err}") from err
        return (psi.reshape(e, q),
                np.ascontiguousarray(P.reshape(e, q, 3, 3)),
                np.ascontiguousarray(A.reshape(e, q, 3, 3, 3, 3)))

    # --- global assemblies ------------------------------------------------

    def internal_forces(self, material, u):
        """Gradient of the stored energy with respect to the DOFs."""
        R = np.zeros(self.dofmap.n_dofs)
        cd = self.dofmap.cell_dofs
        for lo, hi in self._chunks():
            F = self._deformation_gradients(u, lo, hi)
            _, P, _ = self._eval_kernel(material, F, lo)
            Rloc = _accel.element_residuals(self.wdet[lo:hi], self.gradN_x[lo:hi], P)
            np.add.at(R, cd[lo:hi].ravel(), Rloc.ravel())
        return R

    def stored_energy(self, material, u) -> float:
        total = 0.0
        for lo, hi in self._chunks():
            F = self._deformation_gradients(u, lo, hi)
            psi, _, _ = self._eval_kernel(material, F, lo)
            total += float((self.wdet[lo:hi] * psi).sum())
        return total

    def external_forces(self, bc: BoundaryConditions):
        """Dead loads: tractions per tag plus body force, u-independent."""
        Fext = np.zeros(self.dofmap.n_dofs)
        for tag, traction in bc.neumann:
            traction = np.asarray(traction, dtype=np.float64)
            vals, warea, _, fdofs = self._facet_table(tag)
            # floc[f, 3a+i] = sum_q warea[f,q] N_a(q) t_i
            floc = np.einsum("fq,qa,i->fai", warea, vals, traction)
            np.add.at(Fext, fdofs.ravel(), floc.reshape(len(fdofs), -1).ravel())
        if bc.body_force is not None:
            b = bc.body_force
            if callable(b):
                bq = b(self.points_x.reshape(-1, 3)).reshape(self.points_x.shape)
            else:
                bq = np.broadcast_to(np.asarray(b, dtype=np.float64),
                                     self.points_x.shape)
            floc = np.einsum("eq,qa,eqi->eai", self.wdet, self.shape_vals, bq)
            np.add.at(Fext, self.dofmap.cell_dofs.ravel(),
                      floc.reshape(self.mesh.n_cells, -1).ravel())
        return Fext

    def external_energy(self, bc: BoundaryConditions, u) -> float:
        """Work of the dead loads: integral B.u dx + integral T.u ds."""
        uv = self.dofmap.as_vectors(u)
        total = 0.0
        for tag, traction in bc.neumann:
            traction = np.asarray(traction, dtype=np.float64)
            vals, warea, _, fdofs = self._facet_table(tag)
            fnodes = fdofs[:, 0::3] // 3
            uq = np.einsum("qa,fai->fqi", vals, uv[fnodes])
            total += float(np.einsum("fq,fqi,i->", warea, uq, traction))
        if bc.body_force is not None:
            b = bc.body_force
            if callable(b):
                bq = b(self.points_x.reshape(-1, 3)).reshape(self.points_x.shape)
            else:
                bq = np.broadcast_to(np.asarray(b, dtype=np.float64),
                                     self.points_x.shape)
            uq = np.einsum("qa,eai->eqi", self.shape_vals, uv[self.mesh.cells])
            total += float(np.einsum("eq,eqi,eqi->", self.wdet, uq, bq))
        return total

    def residual(self, material, u, bc: BoundaryConditions, load_factor=1.0,
                 external=None):
        """R(u) = internal(u) - load_factor * external."""
        if external is None:
            external = self.external_forces(bc)
        return self.internal_forces(material, u) - load_factor * external

    def total_energy(self, material, u, bc: BoundaryConditions, load_factor=1.0):
        return self.stored_energy(material, u) \
            - load_factor * self.external_energy(bc, u)

    # --- Jacobian ----------------------------------------------------------

    def _build_pattern(self):
        cd = self.dofmap.cell_dofs
        E, m = cd.shape
        n = self.dofmap.n_dofs
        rows = np.repeat(cd, m, axis=1).ravel()
        cols = np.tile(cd, (1, m)).ravel()
        codes = rows * n + cols
        unique = np.unique(codes)
        urows = unique // n
        ucols = unique % n
        counts = np.bincount(urows, minlength=n)
        indptr = np.concatenate([[0], np.cumsum(counts)])
        scatter = np.searchsorted(unique, codes)
        self._pattern = (indptr.astype(np.int64), ucols.astype(np.int64), scatter)

    def jacobian(self, material, u) -> SparseMatrixCSR:
        """Tangent stiffness dR/du as CSR (symmetric for hyperelastic psi)."""
        if self._pattern is None:
            self._build_pattern()
        indptr, indices, scatter = self._pattern
        data = np.zeros(len(indices))
        cd = self.dofmap.cell_dofs
        E, m = cd.shape
        pos = 0
        for lo, hi in self._chunks():
            F = self._deformation_gradients(u, lo, hi)
            _, _, A = self._eval_kernel(material, F, lo)
            Kloc = _accel.element_matrices(self.wdet[lo:hi], self.gradN_x[lo:hi], A)
            cnt = (hi - lo) * m * m
            np.add.at(data, scatter[pos:pos + cnt], Kloc.ravel())
            pos += cnt
        return SparseMatrixCSR(self.dofmap.n_dofs, indptr, indices, data)
