"""Verification harness: closed-form oracles, manufactured solutions,
beam benchmarks and the quadratic-convergence check."""

from .beam import (BEAM_DIMS, DEFAULT_GRID, BeamResult, quadratic_contraction,
                   run_beam_benchmark)
from .mms import (ConvergenceTable, MmsCase, build_family_mesh,
                  coordinate_vector, mms_build, paper_mms_displacement,
                  rel_l2_error, run_mms_convergence)
from .oracles import ClosedFormNeoHookean, ClosedFormStVK

__all__ = [
    "BEAM_DIMS", "DEFAULT_GRID", "BeamResult", "quadratic_contraction",
    "run_beam_benchmark", "ConvergenceTable", "MmsCase", "build_family_mesh",
    "coordinate_vector", "mms_build", "paper_mms_displacement", "rel_l2_error",
    "run_mms_convergence", "ClosedFormNeoHookean", "ClosedFormStVK",
]
