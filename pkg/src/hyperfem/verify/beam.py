"""Cantilever beam benchmarks: 80 x 15 x 15 box, clamped at x=0, dead
surface traction on the x=80 face.

For StVK and Neo-Hookean the same discrete problem is solved twice, once
with the symbolically derived kernels and once with the hand-coded
closed-form kernels, and the relative L2 distance between the two
displacement fields is reported; both routes sit at machine-precision
equilibrium, so the distance is a machine-precision equivalence check.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from ..fem import Assembler, BoundaryConditions, NewtonConfig, dirichlet_from_tag, newton_solve
from ..materials import (lame_from_young_poisson, make_mooney_rivlin,
                         make_neo_hookean, make_stvk)
from .mms import build_family_mesh, rel_l2_error
from .oracles import ClosedFormNeoHookean, ClosedFormStVK

__all__ = ["BeamResult", "run_beam_benchmark", "quadratic_contraction",
           "DEFAULT_GRID", "BEAM_DIMS"]

DEFAULT_GRID = (12, 2, 2)      # reproduces the 351/1875/351/1143 DOF counts
BEAM_DIMS = (80.0, 15.0, 15.0)


@dataclass
class BeamResult:
    material: str
    family: str
    dofs: int
    u: np.ndarray
    report: object
    mean_iteration_ms: float
    cross_check_error: float | None   # vs closed-form kernels (StVK / NH)
    load: tuple

    def as_dict(self):
        return {
            "material": self.material,
            "family": self.family,
            "dofs": self.dofs,
            "iterations": self.report.iterations,
            "load_steps": self.report.load_steps_used,
            "mean_iteration_ms": self.mean_iteration_ms,
            "converged": self.report.converged,
            "cross_check_error": self.cross_check_error,
            "residual_history": list(self.report.residual_history),
            "load": list(self.load),
        }


def _material_pair(name, young, poisson, mr_params, paper_literal):
    """(tape-backed bound material, closed-form oracle or None)."""
    if name in ("stvk", "saint_venant_kirchhoff"):
        lame = lame_from_young_poisson(young, poisson)
        return make_stvk(lame).bind(), ClosedFormStVK(lame.mu, lame.lam)
    if name in ("neo_hookean", "neo-hookean"):
        lame = lame_from_young_poisson(young, poisson)
        return make_neo_hookean(lame).bind(), ClosedFormNeoHookean(lame.mu, lame.lam)
    if name in ("mooney_rivlin", "mooney-rivlin"):
        c01, c10, k = mr_params
        return make_mooney_rivlin(c01, c10, k,
                                  paper_literal_volumetric=paper_literal).bind(), None
    raise ValueError(f"unknown benchmark material {name!r}")


def run_beam_benchmark(material: str = "stvk", family: str = "p1",
                       load=(0.0, -10.0, 0.0), young: float = 3000.0,
                       poisson: float = 0.3,
                       mr_params=(2000.0, 100.0, 1000.0),
                       paper_literal_volumetric: bool = False,
                       grid=DEFAULT_GRID, newton_cfg: NewtonConfig | None = None,
                       timing_repeats: int = 1) -> BeamResult:
    """Solve the cantilever problem; cross-check against the closed form."""
    mesh = build_family_mesh(family, *grid, dims=BEAM_DIMS)
    asm = Assembler(mesh)
    bc = BoundaryConditions(
        dirichlet=dirichlet_from_tag(mesh, "clamp"),
        neumann=[("load", tuple(load))])
    bound, oracle = _material_pair(material, young, poisson, mr_params,
                                   paper_literal_volumetric)

    u, report = newton_solve(asm, bound, bc, newton_cfg)
    times = [report.mean_iteration_ms]
    for _ in range(max(0, timing_repeats - 1)):
        _, rep = newton_solve(asm, bound, bc, newton_cfg)
        times.append(rep.mean_iteration_ms)

    cross = None
    if oracle is not None:
        u_ref, _ = newton_solve(asm, oracle, bc, newton_cfg)
        cross = rel_l2_error(u, u_ref)

    return BeamResult(material=material, family=family,
                      dofs=asm.dofmap.n_dofs, u=u, report=report,
                      mean_iteration_ms=float(np.median(times)),
                      cross_check_error=cross, load=tuple(load))


def quadratic_contraction(residuals, floor_rel: float = 1e-12,
                          floor_jump: float = 100.0,
                          min_order: float = 1.5) -> bool:
    """Check that the terminal iterations contract quadratically.

    Accepts if either (a) the observed convergence order on the last three
    residuals above the machine floor is >= ``min_order`` (fitting
    |r_{k+1}| <= c |r_k|^q), or (b) the history ends by plunging through
    the floor in one step of at least ``floor_jump`` contraction, which is
    how an exact-tangent Newton terminates once the quadratic regime meets
    round-off.  A fixed-rate (linear) iteration fails both branches.
    """
    r = [float(x) for x in residuals]
    if not r:
        return False
    peak = max(r)
    if peak == 0.0:
        return True  # zero-load solve: converged identically
    floor = floor_rel * peak
    tail = list(r)
    floored = []
    while tail and tail[-1] <= floor:
        floored.append(tail.pop())
    if len(tail) < 1:
        return True
    if floored and tail[-1] / floored[-1] >= floor_jump:
        return True
    if len(tail) < 3:
        return not floored  # too short to measure, and no stalled floor tail
    order = np.log(tail[-1] / tail[-2]) / np.log(tail[-2] / tail[-3])
    return bool(order >= min_order)
