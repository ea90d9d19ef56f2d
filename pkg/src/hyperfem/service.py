"""Interactive quasi-static probing service.

A session holds a scene (mesh + material + clamped boundary) and a probe: a
nodal force on one surface vertex.  Every ``step`` runs a Newton solve
warm-started from the previous equilibrium and streams the deformed
geometry plus the probe reaction force.  Sessions are independent; each
connection's messages are handled strictly in order.

Protocol v1, JSON text frames over WebSocket:

  client -> server:
    {"type": "load_scene", "v": 1, "mesh": {...}, "material": {...},
     "clamp": "clamp"}
    {"type": "set_probe", "vertex": int | "point": [x,y,z],
     "force": [fx,fy,fz]}
    {"type": "step"}
    {"type": "reset"}

  server -> client:
    {"type": "scene", "v": 1, "rest_positions": [...], "triangles": [...],
     "clamped": [...], "nv": n, "nc": n, "dofs": n}
    {"type": "ack", "v": 1, "vertex": int}          (set_probe confirmation)
    {"type": "state", "v": 1, "positions": [...], "reaction": [rx,ry,rz],
     "iters": n, "ms": t, "converged": bool}
    {"type": "error", "v": 1, "message": "..."}

Positions are flat float arrays in meters at full precision.
"""

from __future__ import annotations

import asyncio
import json
import time
from importlib import resources

import numpy as np

from .fem import (Assembler, BoundaryConditions, NewtonConfig, NewtonError,
                  dirichlet_from_tag, newton_solve)
from .materials import MaterialError, material_from_config
from .mesh import Mesh, generate_beam_hex, hex_to_tet, promote_quadratic, surface_triangles
from .mesh.gmsh_io import read_msh

__all__ = ["Session", "SessionError", "handle_message", "serve_forever",
           "DEFAULT_DOF_CAP"]

DEFAULT_DOF_CAP = 1500
PROTOCOL_VERSION = 1


class SessionError(Exception):
    pass


def _load_mesh_spec(spec: dict) -> Mesh:
    if "builtin" in spec:
        name = spec["builtin"]
        if name == "liver":
            ref = resources.files("hyperfem.assets").joinpath("liver_coarse.msh")
            with resources.as_file(ref) as path:
                return read_msh(path)
        if name == "beam":
            mesh = generate_beam_hex(int(spec.get("nx", 6)), int(spec.get("ny", 2)),
                                     int(spec.get("nz", 2)),
                                     dims=tuple(spec.get("dims", (80.0, 15.0, 15.0))))
            fam = spec.get("family", "q1")
            if fam == "p1":
                mesh = hex_to_tet(mesh)
            elif fam == "p2":
                mesh = promote_quadratic(hex_to_tet(mesh))
            elif fam == "q2":
                mesh = promote_quadratic(mesh)
            elif fam != "q1":
                raise SessionError(f"unknown element family {fam!r}")
            return mesh
        raise SessionError(f"unknown builtin mesh {name!r}")
    if "file" in spec:
        return read_msh(spec["file"])
    raise SessionError("mesh spec needs 'builtin' or 'file'")


class Session:
    """One interactive scene with its current equilibrium state."""

    def __init__(self, dof_cap: int = DEFAULT_DOF_CAP):
        self.dof_cap = dof_cap
        self.assembler = None
        self.material = None
        self.bc = None
        self.u = None
        self.probe_vertex = None
        self.probe_force = np.zeros(3)
        self.surface_vertices = None
        self.clamped_nodes = None
        self.diverged = False
        self.newton_cfg = NewtonConfig()

    @property
    def loaded(self):
        return self.assembler is not None

    def load_scene(self, mesh_spec: dict, material_spec: dict,
                   clamp_tag: str = "clamp") -> dict:
        mesh = _load_mesh_spec(mesh_spec)
        dofs = 3 * mesh.n_vertices
        if dofs > self.dof_cap:
            raise SessionError(
                f"scene has {dofs} DOFs, above the interactive cap of "
                f"{self.dof_cap}; use a coarser mesh")
        model = material_from_config(material_spec)
        self.material = model.bind()
        self.assembler = Assembler(mesh)
        dirichlet = dirichlet_from_tag(mesh, clamp_tag)
        self.bc = BoundaryConditions(dirichlet=dirichlet)
        self.clamped_nodes = sorted({n for n, _, _ in dirichlet})
        self.u = np.zeros(dofs)
        self.probe_vertex = None
        self.probe_force = np.zeros(3)
        self.diverged = False
        tris = surface_triangles(mesh)
        self.surface_vertices = np.unique(mesh.facets)
        return {
            "type": "scene", "v": PROTOCOL_VERSION,
            "nv": mesh.n_vertices, "nc": mesh.n_cells, "dofs": dofs,
            "family": mesh.family,
            "rest_positions": mesh.vertices.ravel().tolist(),
            "triangles": tris.ravel().tolist(),
            "clamped": [int(n) for n in self.clamped_nodes],
        }

    def _require_loaded(self):
        if not self.loaded:
            raise SessionError("no scene loaded")

    def set_probe(self, vertex=None, point=None, force=(0.0, 0.0, 0.0)) -> dict:
        self._require_loaded()
        mesh = self.assembler.mesh
        if vertex is None:
            if point is None:
                raise SessionError("set_probe needs 'vertex' or 'point'")
            p = np.asarray(point, dtype=np.float64)
            if p.shape != (3,):
                raise SessionError("probe point must have 3 coordinates")
            cand = self.surface_vertices
            d = np.linalg.norm(mesh.vertices[cand] - p, axis=1)
            vertex = int(cand[int(np.argmin(d))])
        vertex = int(vertex)
        if not 0 <= vertex < mesh.n_vertices:
            raise SessionError(f"vertex {vertex} out of range")
        if vertex in self.clamped_nodes:
            raise SessionError(f"vertex {vertex} is clamped; pick a free vertex")
        force = np.asarray(force, dtype=np.float64)
        if force.shape != (3,):
            raise SessionError("probe force must have 3 components")
        self.probe_vertex = vertex
        self.probe_force = force
        return {"type": "ack", "v": PROTOCOL_VERSION, "vertex": vertex,
                "force": force.tolist()}

    def step(self) -> dict:
        self._require_loaded()
        t0 = time.perf_counter()
        external = np.zeros(self.assembler.dofmap.n_dofs)
        if self.probe_vertex is not None:
            external[3 * self.probe_vertex: 3 * self.probe_vertex + 3] = self.probe_force
        converged = True
        iters = 0
        try:
            u, rep = newton_solve(self.assembler, self.material, self.bc,
                                  self.newton_cfg, u0=self.u, external=external)
            self.u = u
            self.diverged = False
            iters = rep.iterations
        except NewtonError as err:
            converged = False
            self.diverged = True
            iters = err.report.iterations
        ms = 1e3 * (time.perf_counter() - t0)
        return self._state(iters, ms, converged)

    def reset(self) -> dict:
        self._require_loaded()
        self.u = np.zeros_like(self.u)
        self.probe_vertex = None
        self.probe_force = np.zeros(3)
        self.diverged = False
        return self._state(0, 0.0, True)

    def _state(self, iters, ms, converged) -> dict:
        mesh = self.assembler.mesh
        positions = (mesh.vertices + self.u.reshape(-1, 3)).ravel()
        if self.probe_vertex is not None:
            internal = self.assembler.internal_forces(self.material, self.u)
            v = self.probe_vertex
            reaction = (-internal[3 * v: 3 * v + 3]).tolist()
        else:
            reaction = [0.0, 0.0, 0.0]
        return {"type": "state", "v": PROTOCOL_VERSION,
                "positions": positions.tolist(), "reaction": reaction,
                "iters": int(iters), "ms": float(ms), "converged": bool(converged)}


def handle_message(session: Session, raw: str) -> dict:
    """Dispatch one JSON text frame; always returns a reply frame."""
    try:
        msg = json.loads(raw)
    except json.JSONDecodeError as err:
        return {"type": "error", "v": PROTOCOL_VERSION,
                "message": f"malformed JSON: {err}"}
    if not isinstance(msg, dict) or "type" not in msg:
        return {"type": "error", "v": PROTOCOL_VERSION,
                "message": "frame must be an object with a 'type' field"}
    if msg.get("v", PROTOCOL_VERSION) != PROTOCOL_VERSION:
        return {"type": "error", "v": PROTOCOL_VERSION,
                "message": f"unsupported protocol version {msg.get('v')}"}
    kind = msg["type"]
    try:
        if kind == "load_scene":
            return session.load_scene(msg.get("mesh", {}), msg.get("material", {}),
                                      msg.get("clamp", "clamp"))
        if kind == "set_probe":
            return session.set_probe(msg.get("vertex"), msg.get("point"),
                                     msg.get("force", (0.0, 0.0, 0.0)))
        if kind == "step":
            return session.step()
        if kind == "reset":
            return session.reset()
        return {"type": "error", "v": PROTOCOL_VERSION,
                "message": f"unknown message type {kind!r}"}
    except (SessionError, MaterialError, ValueError, OSError) as err:
        return {"type": "error", "v": PROTOCOL_VERSION, "message": str(err)}


_MIME = {".html": "text/html", ".js": "text/javascript", ".css": "text/css",
         ".json": "application/json", ".map": "application/json",
         ".msh": "text/plain"}


def _static_responder(static_dir):
    import pathlib

    from websockets.datastructures import Headers
    from websockets.http11 import Response

    root = pathlib.Path(static_dir).resolve()

    def process_request(connection, request):
        if request.headers.get("Upgrade", "").lower() == "websocket":
            return None  # continue with the WebSocket handshake
        path = request.path.split("?")[0]
        if path.endswith("/"):
            path += "index.html"
        target = (root / path.lstrip("/")).resolve()
        if not str(target).startswith(str(root)) or not target.is_file():
            return Response(404, "Not Found", Headers(), b"not found\n")
        body = target.read_bytes()
        headers = Headers()
        headers["Content-Type"] = _MIME.get(target.suffix, "application/octet-stream")
        headers["Content-Length"] = str(len(body))
        return Response(200, "OK", headers, body)

    return process_request


async def _amain(host, port, static_dir, dof_cap):
    from websockets.asyncio.server import serve

    async def handler(ws):
        session = Session(dof_cap=dof_cap)
        async for raw in ws:
            reply = await asyncio.to_thread(handle_message, session, raw)
            await ws.send(json.dumps(reply))

    process_request = _static_responder(static_dir) if static_dir else None
    async with serve(handler, host, port, process_request=process_request,
                     max_size=16 * 1024 * 1024) as server:
        print(f"listening on ws://{host}:{port}"
              + (f" (static files from {static_dir})" if static_dir else ""))
        await server.serve_forever()


def serve_forever(host: str = "127.0.0.1", port: int = 8787,
                  static_dir=None, dof_cap: int = DEFAULT_DOF_CAP):
    """Blocking entry point used by the CLI ``serve`` subcommand."""
    asyncio.run(_amain(host, port, static_dir, dof_cap))
