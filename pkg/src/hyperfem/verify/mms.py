"""Manufactured solutions: symbolic body-force derivation and convergence.

Given a displacement field u(x, y, z) as expressions in the coordinate
variables and a material model, the stress field P(x) is obtained by
substituting F(x) = I + grad u(x) into the symbolically derived dpsi/dF,
and the compatible body force is f = -Div P, all inside the same
expression DAG (no external algebra system).  The exact solution is then
imposed as Dirichlet data on the whole boundary and f applied as body
force; nodal solutions must converge at the element order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..fem import Assembler, BoundaryConditions, NewtonConfig, newton_solve
from ..materials import MaterialModel
from ..mesh import generate_beam_hex, hex_to_tet, promote_quadratic
from ..symbolic import (compile_tape, constant, differentiate, neg,
                        substitute, variable)
from ..symbolic.tensor import TensorExpr

__all__ = ["MmsCase", "ConvergenceTable", "mms_build", "rel_l2_error",
           "run_mms_convergence", "coordinate_vector", "paper_mms_displacement",
           "build_family_mesh"]

_COORDS = [variable("x", i) for i in range(3)]


def coordinate_vector():
    """The (x, y, z) coordinate leaves as expressions."""
    return tuple(_COORDS)


def paper_mms_displacement():
    """u = 1e-2 z (e^x, e^y, e^z): the benchmark manufactured field."""
    from ..symbolic import exp as _exp
    from ..symbolic.tensor import vector
    x, y, z = _COORDS
    c = constant(1e-2)
    return vector([c * z * _exp(x), c * z * _exp(y), c * z * _exp(z)])


def rel_l2_error(u, v) -> float:
    """Euclidean relative error |u - v| / |v|."""
    u = np.asarray(u, dtype=np.float64).ravel()
    v = np.asarray(v, dtype=np.float64).ravel()
    if u.shape != v.shape:
        raise ValueError(f"length mismatch: {u.shape} vs {v.shape}")
    nv = float(np.linalg.norm(v))
    if nv == 0.0:
        raise ValueError("reference vector has zero norm")
    return float(np.linalg.norm(u - v)) / nv


class MmsCase:
    """Exact field, derived body force, and their compiled evaluators."""

    def __init__(self, material: MaterialModel, u_exact: TensorExpr,
                 param_values: dict | None = None):
        if u_exact.shape != (3,):
            raise ValueError("u_exact must be a 3-vector expression")
        self.material = material
        self.u_exact = u_exact
        values = dict(material.defaults)
        if param_values:
            values.update(param_values)
        from ..symbolic import parameter
        bind = {parameter(n): constant(v) for n, v in values.items()}

        # F(x) = I + grad u, entry by entry
        Fx = [[None] * 3 for _ in range(3)]
        for i in range(3):
            for j in range(3):
                g = differentiate(u_exact[i], _COORDS[j])
                Fx[i][j] = g if i != j else constant(1.0) + g

        fvar = {variable("F", 3 * i + j): Fx[i][j]
                for i in range(3) for j in range(3)}
        psi = substitute(material.psi, bind)
        P_F = [differentiate(psi, variable("F", k)) for k in range(9)]
        self.P_field = [substitute(p, fvar) for p in P_F]

        # f_i = -sum_j dP_ij/dx_j
        self.body_force_field = []
        for i in range(3):
            s = constant(0.0)
            for j in range(3):
                s = s + differentiate(self.P_field[3 * i + j], _COORDS[j])
            self.body_force_field.append(neg(s))

        self._u_kernel = compile_tape(list(u_exact.entries), _COORDS)
        self._f_kernel = compile_tape(self.body_force_field, _COORDS)
        self._p_kernel = compile_tape(self.P_field, _COORDS)

    def u_at(self, x) -> np.ndarray:
        return self._u_kernel.evaluate(np.atleast_2d(np.asarray(x, dtype=np.float64)))

    def body_force_at(self, x) -> np.ndarray:
        return self._f_kernel.evaluate(np.atleast_2d(np.asarray(x, dtype=np.float64)))

    def stress_at(self, x) -> np.ndarray:
        return self._p_kernel.evaluate(np.atleast_2d(np.asarray(x, dtype=np.float64)))

    def fd_divergence_check(self, points, h=1e-6):
        """Max relative deviation of f from -Div P by central differences."""
        points = np.asarray(points, dtype=np.float64)
        f = self.body_force_at(points)
        div = np.zeros_like(f)
        for j in range(3):
            dp = points.copy()
            dm = points.copy()
            dp[:, j] += h
            dm[:, j] -= h
            dP = (self.stress_at(dp) - self.stress_at(dm)) / (2 * h)
            for i in range(3):
                div[:, i] += dP[:, 3 * i + j]
        scale = max(1.0, float(np.abs(f).max()))
        return float(np.abs(f + div).max()) / scale


def mms_build(material: MaterialModel, u_exact: TensorExpr,
              param_values: dict | None = None) -> MmsCase:
    return MmsCase(material, u_exact, param_values)


@dataclass
class ConvergenceTable:
    rows: list = field(default_factory=list)  # (h, dofs, error, order|None)

    def add(self, h, dofs, error):
        order = None
        if self.rows:
            hp, _, ep, _ = self.rows[-1]
            order = float(np.log(ep / error) / np.log(hp / h))
        self.rows.append((float(h), int(dofs), float(error), order))

    @property
    def errors(self):
        return [r[2] for r in self.rows]

    @property
    def final_order(self):
        return self.rows[-1][3] if len(self.rows) >= 2 else None

    def as_dict(self):
        return {"rows": [{"h": h, "dofs": d, "error": e, "order": o}
                         for h, d, e, o in self.rows]}

    def __str__(self):
        lines = [f"{'h':>10} {'DOFs':>8} {'rel L2 error':>14} {'order':>7}"]
        for h, d, e, o in self.rows:
            lines.append(f"{h:>10.4g} {d:>8d} {e:>14.6e} "
                         + (f"{o:>7.3f}" if o is not None else f"{'-':>7}"))
        return "\n".join(lines)


def build_family_mesh(family: str, nx: int, ny: int, nz: int,
                      dims=(80.0, 15.0, 15.0)):
    """Structured mesh of the box domain for any supported family."""
    base = generate_beam_hex(nx, ny, nz, dims)
    if family == "q1":
        return base
    if family == "q2":
        return promote_quadratic(base)
    if family == "p1":
        return hex_to_tet(base)
    if family == "p2":
        return promote_quadratic(hex_to_tet(base))
    raise ValueError(f"unknown family {family!r}; use p1/p2/q1/q2")


def run_mms_convergence(case: MmsCase, family: str, levels,
                        material_values: dict | None = None,
                        newton_cfg: NewtonConfig | None = None) -> ConvergenceTable:
    """Solve on a refinement sequence of the unit cube; tabulate nodal errors."""
    levels = list(levels)
    if len(levels) < 3:
        raise ValueError("need at least 3 refinement levels")
    bound = case.material.bind(material_values)
    table = ConvergenceTable()
    for n in levels:
        mesh = build_family_mesh(family, n, n, n, dims=(1.0, 1.0, 1.0))
        asm = Assembler(mesh)
        boundary_nodes = np.unique(mesh.facets)
        uex_nodes = case.u_at(mesh.vertices)
        dirichlet = [(int(nd), c, float(uex_nodes[nd, c]))
                     for nd in boundary_nodes for c in range(3)]
        bc = BoundaryConditions(
            dirichlet=dirichlet,
            body_force=lambda x: case.body_force_at(x))
        u, rep = newton_solve(asm, bound, bc, newton_cfg)
        err = rel_l2_error(u, uex_nodes.ravel())
        table.add(1.0 / n, asm.dofmap.n_dofs, err)
    return table
