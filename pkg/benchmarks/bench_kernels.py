"""Benchmark: compiled kernels vs the pure-numpy fallback.

Measures tape evaluation throughput per material, one full tangent
assembly, and a complete beam solve, in whichever lane is active, then
(by default) re-runs itself with HYPERFEM_PURE_PYTHON=1 and prints the
side-by-side comparison.

Usage: python benchmarks/bench_kernels.py [--no-subprocess] [--json]
"""

import argparse
import json
import os
import subprocess
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))


def timed(fn, repeats=5):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def run_lane():
    import hyperfem
    from hyperfem.fem import (Assembler, BoundaryConditions,
                              dirichlet_from_tag, newton_solve)
    from hyperfem.materials import (lame_from_young_poisson,
                                    make_holzapfel_ogden, make_mooney_rivlin,
                                    make_neo_hookean, make_stvk)
    from hyperfem.verify import build_family_mesh

    lame = lame_from_young_poisson(3000.0, 0.3)
    mats = {
        "stvk": make_stvk(lame).bind(),
        "neo_hookean": make_neo_hookean(lame).bind(),
        "mooney_rivlin": make_mooney_rivlin(2000, 100, 1000).bind(),
        "holzapfel_ogden": make_holzapfel_ogden(
            a=59.0, b=8.023, a_f=18472.0, b_f=16.026, a_s=2481.0, b_s=11.12,
            a_fs=216.0, b_fs=11.436, kappa=1e4).bind(),
    }

    out = {"backend": hyperfem.kernel_backend, "tape_meval_per_s": {},
           "tape_instructions": {}}
    n = 20000
    rng = np.random.default_rng(0)
    F = np.eye(3).ravel() + 0.05 * rng.standard_normal((n, 9))
    for name, bound in mats.items():
        scratch = bound.new_scratch(n)
        bound.eval_batch(F, scratch)  # warm up
        dt = timed(lambda: bound.eval_batch(F, scratch))
        out["tape_meval_per_s"][name] = n * bound.kernel.n_instructions / dt / 1e6
        out["tape_instructions"][name] = bound.kernel.n_instructions

    mesh = build_family_mesh("q2", 12, 2, 2)
    asm = Assembler(mesh)
    u = np.zeros(asm.dofmap.n_dofs)
    asm.jacobian(mats["neo_hookean"], u)  # builds the pattern
    out["q2_tangent_assembly_ms"] = 1e3 * timed(
        lambda: asm.jacobian(mats["neo_hookean"], u))

    bc = BoundaryConditions(dirichlet=dirichlet_from_tag(mesh, "clamp"),
                            neumann=[("load", (0.0, -10.0, 0.0))])
    t0 = time.perf_counter()
    _, rep = newton_solve(asm, mats["neo_hookean"], bc)
    out["q2_beam_solve_ms"] = 1e3 * (time.perf_counter() - t0)
    out["q2_mean_iteration_ms"] = rep.mean_iteration_ms
    return out


def fmt(results):
    lanes = [r["backend"] for r in results]
    lines = [f"{'metric':<42}" + "".join(f"{l:>14}" for l in lanes)]
    mats = results[0]["tape_meval_per_s"]
    for name in mats:
        row = f"tape eval {name} [M instr/s]"
        lines.append(f"{row:<42}" + "".join(
            f"{r['tape_meval_per_s'][name]:>14.1f}" for r in results))
    for key, label in (("q2_tangent_assembly_ms", "Q2 beam tangent assembly [ms]"),
                       ("q2_mean_iteration_ms", "Q2 beam mean NR iteration [ms]"),
                       ("q2_beam_solve_ms", "Q2 beam full solve [ms]")):
        lines.append(f"{label:<42}" + "".join(f"{r[key]:>14.1f}" for r in results))
    return "\n".join(lines)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--no-subprocess", action="store_true",
                    help="only benchmark the active lane")
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args()

    results = [run_lane()]
    if not args.no_subprocess and results[0]["backend"] == "compiled":
        env = dict(os.environ, HYPERFEM_PURE_PYTHON="1")
        proc = subprocess.run(
            [sys.executable, __file__, "--no-subprocess", "--json"],
            env=env, capture_output=True, text=True, check=True)
        results.append(json.loads(proc.stdout))

    if args.json:
        print(json.dumps(results[0] if args.no_subprocess else results, indent=2))
    else:
        print(fmt(results))


if __name__ == "__main__":
    main()
