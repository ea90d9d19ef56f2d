"""Newton-Raphson driver with load stepping and bisection on failure.

Each iteration assembles the tangent, applies the boundary conditions by
symmetric elimination, solves K du = -R, updates u and re-evaluates the
residual; the iteration time is the wall-clock duration of exactly that
sequence.  Convergence requires both the force residual and the
displacement increment to drop below their tolerances, measured relative
to the first iteration (with absolute floors), so converged states sit at
machine-precision equilibrium.

If a load step fails (element inversion, kernel domain error, or no
convergence within the iteration budget) the step is bisected, up to
``max_bisections`` times, restarting from the last converged state.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from ..elements import InvertedElementError
from .assembly import Assembler, AssemblyError, BoundaryConditions, collect_dirichlet
from .sparse import LinearSolveError, apply_dirichlet, linear_solve

__all__ = ["NewtonConfig", "NewtonReport", "NewtonError", "newton_solve"]


@dataclass
class NewtonConfig:
    max_iterations: int = 25
    residual_tol: float = 1e-10       # relative to the initial residual
    increment_tol: float = 1e-10      # relative to the current |u|
    residual_abs_floor: float = 1e-14
    increment_abs_floor: float = 1e-14
    stall_ratio: float = 0.25         # residual-floor stall detection
    load_steps: int = 1
    max_bisections: int = 4


@dataclass
class NewtonReport:
    iterations: int = 0
    residual_history: list = field(default_factory=list)
    increment_history: list = field(default_factory=list)
    mean_iteration_ms: float = 0.0
    converged: bool = False
    load_steps_used: int = 0
    bisections: int = 0
    message: str = ""

    def last_step_residuals(self):
        """Residual norms of the final (full-load) step."""
        n = self._last_step_len
        return self.residual_history[-n:] if n else []

    _last_step_len: int = 0


class NewtonError(RuntimeError):
    def __init__(self, message, report: NewtonReport):
        super().__init__(message)
        self.report = report


def newton_solve(assembler: Assembler, material, bc: BoundaryConditions,
                 cfg: NewtonConfig | None = None, u0: np.ndarray | None = None,
                 external: np.ndarray | None = None):
    """Solve for the displacement field; returns (u, NewtonReport).

    ``external`` overrides the assembled dead-load vector (used for nodal
    point loads such as interactive probes).
    """
    cfg = cfg or NewtonConfig()
    ndofs = assembler.dofmap.n_dofs
    dofs, values = collect_dirichlet(bc, assembler.mesh.n_vertices)
    u = np.zeros(ndofs) if u0 is None else np.array(u0, dtype=np.float64, copy=True)
    u[dofs] = values  # enforce constraints exactly; increments stay zero
    zero_inc = np.zeros(len(dofs))
    Fext = assembler.external_forces(bc) if external is None else np.asarray(external, dtype=np.float64)

    report = NewtonReport()
    times = []

    achieved = 0.0
    step = 1.0 / max(1, cfg.load_steps)
    while achieved < 1.0 - 1e-12:
        lam = min(achieved + step, 1.0)
        try:
            u_trial, n_it, res_hist, inc_hist, it_times = _solve_step(
                assembler, material, u, lam, Fext, dofs, zero_inc, cfg)
        except (InvertedElementError, AssemblyError, LinearSolveError,
                _StepDiverged) as err:
            report.bisections += 1
            if report.bisections > cfg.max_bisections:
                report.message = (f"load step to {lam:.4g} failed after "
                                  f"{cfg.max_bisections} bisections: {err}")
                if isinstance(err, _StepDiverged):
                    report.iterations += err.iterations
                    report.residual_history += err.res_hist
                    report.increment_history += err.inc_hist
                raise NewtonError(report.message, report) from err
            step /= 2.0
            continue
        u = u_trial
        achieved = lam
        report.load_steps_used += 1
        report.iterations += n_it
        report.residual_history += res_hist
        report.increment_history += inc_hist
        report._last_step_len = n_it
        times += it_times

    report.converged = True
    report.mean_iteration_ms = 1e3 * float(np.mean(times)) if times else 0.0
    return u, report


class _StepDiverged(RuntimeError):
    def __init__(self, message, iterations, res_hist, inc_hist):
        super().__init__(message)
        self.iterations = iterations
        self.res_hist = res_hist
        self.inc_hist = inc_hist


def _solve_step(assembler, material, u_start, lam, Fext, dofs, zero_inc, cfg):
    u = u_start.copy()
    res_hist, inc_hist, times = [], [], []

    R = assembler.residual(material, u, None, lam, external=Fext)
    R[dofs] = 0.0
    # Residual scale: the initial imbalance or the applied load, whichever
    # is larger.  Warm starts begin at machine-floor imbalance; without the
    # load term the relative criterion could then never be met.
    Fl = lam * Fext.copy()
    Fl[dofs] = 0.0
    r0 = max(float(np.linalg.norm(R)), float(np.linalg.norm(Fl)),
             cfg.residual_abs_floor)

    for it in range(1, cfg.max_iterations + 1):
        t0 = time.perf_counter()
        K = assembler.jacobian(material, u)
        K2, R2 = apply_dirichlet(K, R, dofs, zero_inc)
        du = linear_solve(K2, -R2)
        u += du
        R = assembler.residual(material, u, None, lam, external=Fext)
        R[dofs] = 0.0
        r_norm = float(np.linalg.norm(R))
        du_norm = float(np.linalg.norm(du))
        times.append(time.perf_counter() - t0)

        res_hist.append(r_norm)
        inc_hist.append(du_norm)
        u_norm = float(np.linalg.norm(u))
        res_ok = r_norm <= max(cfg.residual_tol * r0, cfg.residual_abs_floor)
        inc_ok = du_norm <= max(cfg.increment_tol * u_norm, cfg.increment_abs_floor)
        if res_ok and inc_ok:
            return u, it, res_hist, inc_hist, times
        # Round-off floor: the assembled residual cannot drop below the
        # machine noise of the stiffness scale, which may sit above the
        # load-relative tolerance for small loads.  If the increment
        # criterion holds and the residual has stopped improving, the
        # iterate is the equilibrium to attainable precision.
        if inc_ok and it >= 2 and r_norm >= cfg.stall_ratio * res_hist[-2]:
            return u, it, res_hist, inc_hist, times
        if not np.isfinite(r_norm) or not np.isfinite(du_norm):
            raise _StepDiverged(f"non-finite residual at iteration {it}",
                                it, res_hist, inc_hist)

    raise _StepDiverged(
        f"no convergence in {cfg.max_iterations} iterations "
        f"(residual {res_hist[-1]:.3e}, rel {res_hist[-1] / r0:.3e})",
        cfg.max_iterations, res_hist, inc_hist)
