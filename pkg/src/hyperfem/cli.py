"""Command-line entry point.

Subcommands: ``beam`` (benchmark with oracle cross-check), ``mms``
(manufactured-solution convergence study), ``solve`` (JSON-configured
problem), ``mesh-info``, ``serve`` (interactive probing service).

Exit codes: 0 success, 1 solver failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

__all__ = ["main", "CONFIG_SCHEMA"]

CONFIG_SCHEMA = {
    "type": "object",
    "required": ["mesh", "material", "boundary_conditions"],
    "additionalProperties": False,
    "properties": {
        "mesh": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "file": {"type": "string"},
                "generate": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "kind": {"enum": ["beam"]},
                        "nx": {"type": "integer", "minimum": 1},
                        "ny": {"type": "integer", "minimum": 1},
                        "nz": {"type": "integer", "minimum": 1},
                        "dims": {"type": "array", "items": {"type": "number"},
                                 "minItems": 3, "maxItems": 3},
                        "family": {"enum": ["p1", "p2", "q1", "q2"]},
                    },
                },
            },
        },
        "material": {
            "type": "object",
            "properties": {
                "name": {"type": "string"},
                "builtin": {"type": "string"},
                "expression": {"type": "string"},
                "params": {"type": "object"},
                "fibers": {"type": "object"},
                "paper_literal_volumetric": {"type": "boolean"},
            },
        },
        "boundary_conditions": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "dirichlet": {"type": "array", "items": {"type": "object"}},
                "neumann": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["tag", "traction"],
                        "properties": {
                            "tag": {"type": "string"},
                            "traction": {"type": "array",
                                         "items": {"type": "number"},
                                         "minItems": 3, "maxItems": 3},
                        },
                    },
                },
                "body_force": {"type": "array", "items": {"type": "number"},
                               "minItems": 3, "maxItems": 3},
            },
        },
        "solver": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "max_iterations": {"type": "integer", "minimum": 1},
                "residual_tol": {"type": "number"},
                "increment_tol": {"type": "number"},
                "load_steps": {"type": "integer", "minimum": 1},
                "max_bisections": {"type": "integer", "minimum": 0},
            },
        },
        "quadrature_degree": {"type": ["integer", "null"]},
        "output": {"type": "string"},
    },
}

_MMS_DEFAULT_LEVELS = {
    "p1": [4, 6, 8, 12, 16],
    "p2": [1, 2, 3, 4],
    "q1": [2, 4, 6, 8, 10],
    "q2": [1, 2, 3, 4],
}


def _cmd_beam(args):
    from .verify import quadratic_contraction, run_beam_benchmark

    result = run_beam_benchmark(
        material=args.material, family=args.element,
        load=(0.0, args.load, 0.0), young=args.young, poisson=args.poisson,
        paper_literal_volumetric=args.paper_literal_volumetric,
        timing_repeats=args.repeats)
    payload = result.as_dict()
    payload["quadratic_contraction"] = quadratic_contraction(
        result.report.residual_history)
    if args.json:
        print(json.dumps(payload, indent=2))
    else:
        cross = ("-" if result.cross_check_error is None
                 else f"{result.cross_check_error:.3e}")
        print(f"{'material':>14} {'elem':>5} {'DOFs':>6} {'iters':>6} "
              f"{'mean NR ms':>11} {'cross-check':>12}")
        print(f"{result.material:>14} {result.family:>5} {result.dofs:>6d} "
              f"{result.report.iterations:>6d} "
              f"{result.mean_iteration_ms:>11.2f} {cross:>12}")
    return 0


def _cmd_mms(args):
    from .materials import lame_from_young_poisson, make_neo_hookean, make_stvk
    from .verify import mms_build, paper_mms_displacement, run_mms_convergence

    lame = lame_from_young_poisson(args.young, args.poisson)
    model = make_stvk(lame) if args.material == "stvk" else make_neo_hookean(lame)
    case = mms_build(model, paper_mms_displacement())
    defaults = _MMS_DEFAULT_LEVELS[args.element]
    if args.levels > len(defaults):
        print(f"error: at most {len(defaults)} levels supported for "
              f"{args.element}", file=sys.stderr)
        return 2
    levels = defaults[:args.levels]
    if len(levels) < 3:
        print("error: need at least 3 levels", file=sys.stderr)
        return 2
    table = run_mms_convergence(case, args.element, levels)
    if args.json:
        print(json.dumps(table.as_dict(), indent=2))
    else:
        print(table)
    return 0


def _config_error(message):
    print(f"error: {message}", file=sys.stderr)
    return 2


def _cmd_solve(args):
    import jsonschema

    from .fem import (Assembler, BoundaryConditions, NewtonConfig, NewtonError,
                      dirichlet_from_tag, newton_solve)
    from .materials import MaterialError, material_from_config
    from .mesh import MeshError, mesh_summary
    from .mesh.gmsh_io import read_msh
    from .mesh.vtu import write_vtu
    from .verify import build_family_mesh

    try:
        with open(args.config) as fh:
            cfg = json.load(fh)
    except OSError as err:
        return _config_error(err)
    except json.JSONDecodeError as err:
        return _config_error(f"invalid JSON in {args.config}: {err}")
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as err:
        return _config_error(f"config field {err.json_path}: {err.message}")

    mesh_cfg = cfg["mesh"]
    try:
        if "file" in mesh_cfg:
            mesh = read_msh(mesh_cfg["file"])
        elif "generate" in mesh_cfg:
            g = mesh_cfg["generate"]
            mesh = build_family_mesh(
                g.get("family", "q1"), g.get("nx", 12), g.get("ny", 2),
                g.get("nz", 2), dims=tuple(g.get("dims", (80.0, 15.0, 15.0))))
        else:
            return _config_error("config field $.mesh: needs 'file' or 'generate'")
        material = material_from_config(cfg["material"]).bind()
    except (MeshError, MaterialError, OSError) as err:
        return _config_error(err)

    bcc = cfg["boundary_conditions"]
    dirichlet = []
    for item in bcc.get("dirichlet", []):
        if "tag" in item:
            dirichlet += dirichlet_from_tag(mesh, item["tag"],
                                            item.get("value", (0.0, 0.0, 0.0)))
        elif {"node", "component", "value"} <= item.keys():
            dirichlet.append((item["node"], item["component"], item["value"]))
        else:
            return _config_error(
                "config field $.boundary_conditions.dirichlet: entries need "
                "'tag' or (node, component, value)")
    neumann = [(item["tag"], tuple(item["traction"]))
               for item in bcc.get("neumann", [])]
    body = bcc.get("body_force")
    bc = BoundaryConditions(dirichlet=dirichlet, neumann=neumann,
                            body_force=tuple(body) if body else None)

    sol = cfg.get("solver", {})
    ncfg = NewtonConfig(
        max_iterations=sol.get("max_iterations", 25),
        residual_tol=sol.get("residual_tol", 1e-10),
        increment_tol=sol.get("increment_tol", 1e-10),
        load_steps=sol.get("load_steps", 1),
        max_bisections=sol.get("max_bisections", 4))

    asm = Assembler(mesh, quad_degree=cfg.get("quadrature_degree"))
    try:
        u, report = newton_solve(asm, material, bc, ncfg)
    except NewtonError as err:
        print(f"solver failed: {err}", file=sys.stderr)
        return 1

    out = {
        "mesh": mesh_summary(mesh),
        "material": material.name,
        "iterations": report.iterations,
        "load_steps": report.load_steps_used,
        "mean_iteration_ms": report.mean_iteration_ms,
        "converged": report.converged,
        "residual_history": report.residual_history,
        "max_displacement": float(np.abs(u).max()),
    }
    if "output" in cfg:
        write_vtu(cfg["output"], mesh, {"displacement": u.reshape(-1, 3)})
        out["output"] = cfg["output"]
    if args.json:
        print(json.dumps(out, indent=2))
    else:
        for k, v in out.items():
            if k != "residual_history":
                print(f"{k}: {v}")
    return 0


def _cmd_mesh_info(args):
    from .mesh import mesh_summary
    from .mesh.gmsh_io import read_msh

    try:
        mesh = read_msh(args.file)
    except OSError as err:
        return _config_error(err)
    info = mesh_summary(mesh)
    if args.json:
        print(json.dumps(info, indent=2))
    else:
        for k, v in info.items():
            print(f"{k}: {v}")
    return 0


def _cmd_serve(args):
    from .service import serve_forever

    serve_forever(host=args.host, port=args.port, static_dir=args.static_dir,
                  dof_cap=args.dof_cap)
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="hyperfem",
                                description="Hyperelastic FE toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("beam", help="cantilever benchmark with oracle cross-check")
    b.add_argument("--material", default="stvk",
                   choices=["stvk", "neo_hookean", "mooney_rivlin"])
    b.add_argument("--element", default="p1", choices=["p1", "p2", "q1", "q2"])
    b.add_argument("--load", type=float, default=-10.0,
                   help="traction in y on the load face [Pa]")
    b.add_argument("--young", type=float, default=3000.0)
    b.add_argument("--poisson", type=float, default=0.3)
    b.add_argument("--paper-literal-volumetric", action="store_true",
                   help="Mooney-Rivlin (K/2) ln J volumetric variant")
    b.add_argument("--repeats", type=int, default=5,
                   help="timing repeats (median reported)")
    b.add_argument("--json", action="store_true")
    b.set_defaults(func=_cmd_beam)

    m = sub.add_parser("mms", help="manufactured-solution convergence study")
    m.add_argument("--element", default="p1", choices=["p1", "p2", "q1", "q2"])
    m.add_argument("--levels", type=int, default=4)
    m.add_argument("--material", default="stvk", choices=["stvk", "neo_hookean"])
    m.add_argument("--young", type=float, default=3000.0)
    m.add_argument("--poisson", type=float, default=0.3)
    m.add_argument("--json", action="store_true")
    m.set_defaults(func=_cmd_mms)

    s = sub.add_parser("solve", help="solve a JSON-configured problem")
    s.add_argument("config")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=_cmd_solve)

    i = sub.add_parser("mesh-info", help="inspect a .msh file")
    i.add_argument("file")
    i.add_argument("--json", action="store_true")
    i.set_defaults(func=_cmd_mesh_info)

    v = sub.add_parser("serve", help="run the interactive probing service")
    v.add_argument("--host", default="127.0.0.1")
    v.add_argument("--port", type=int, default=8787)
    v.add_argument("--static-dir", default=None,
                   help="directory of frontend assets to serve over HTTP")
    v.add_argument("--dof-cap", type=int, default=1500)
    v.set_defaults(func=_cmd_serve)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return 2 if err.code not in (0, None) else 0
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
