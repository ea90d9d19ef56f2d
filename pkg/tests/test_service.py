import asyncio
import json
import pathlib
import socket
import threading
import time
import urllib.request

import numpy as np
import pytest

import hyperfem
from hyperfem.service import DEFAULT_DOF_CAP, Session, SessionError, handle_message

DATA = pathlib.Path(__file__).parent / "data"

BEAM_SCENE = {"builtin": "beam", "nx": 4, "ny": 1, "nz": 1, "family": "q1"}
STVK = {"builtin": "stvk", "params": {"young": 3000.0, "poisson": 0.3}}


def _loaded_session():
    s = Session()
    s.load_scene(BEAM_SCENE, STVK)
    return s


class TestSession:
    def test_scene_summary_fields(self):
        s = Session()
        scene = s.load_scene(BEAM_SCENE, STVK)
        assert scene["dofs"] == 3 * scene["nv"]
        assert len(scene["rest_positions"]) == 3 * scene["nv"]
        assert len(scene["triangles"]) % 3 == 0
        assert scene["clamped"]

    def test_liver_demo_scene_within_cap(self):
        s = Session()
        scene = s.load_scene({"builtin": "liver"},
                             {"builtin": "neo_hookean",
                              "params": {"young": 3000.0, "poisson": 0.3}})
        assert scene["dofs"] <= 600  # interactive demo regime
        st = s.step()
        assert st["converged"] and st["iters"] == 1

    def test_dof_cap_refusal(self):
        s = Session(dof_cap=50)
        with pytest.raises(SessionError, match="cap"):
            s.load_scene(BEAM_SCENE, STVK)
        # the default cap also refuses genuinely large scenes
        big = Session(dof_cap=DEFAULT_DOF_CAP)
        with pytest.raises(SessionError, match="cap"):
            big.load_scene({"builtin": "beam", "nx": 40, "ny": 4, "nz": 4,
                            "family": "q1"}, STVK)

    def test_zero_force_step_is_rest(self):
        s = _loaded_session()
        rest = np.array(s.assembler.mesh.vertices).ravel()
        st = s.step()
        assert np.array_equal(np.array(st["positions"]), rest)

    def test_probe_on_clamped_vertex_rejected(self):
        s = _loaded_session()
        with pytest.raises(SessionError, match="clamped"):
            s.set_probe(vertex=int(s.clamped_nodes[0]), force=(0, 0, 1))

    def test_point_snaps_to_nearest_surface_vertex(self):
        s = _loaded_session()
        mesh = s.assembler.mesh
        target = int(np.unique(mesh.facets)[-1])
        p = mesh.vertices[target] + [0.3, -0.2, 0.1]
        ack = s.set_probe(point=p.tolist(), force=(0, 0, 0))
        # brute-force nearest among surface vertices
        surf = np.unique(mesh.facets)
        d = np.linalg.norm(mesh.vertices[surf] - p, axis=1)
        assert ack["vertex"] == int(surf[np.argmin(d)])

    def test_reaction_balances_probe_force(self):
        s = _loaded_session()
        free = [v for v in np.unique(s.assembler.mesh.facets)
                if v not in s.clamped_nodes]
        s.set_probe(vertex=int(free[-1]), force=(0.0, 0.0, -0.8))
        st = s.step()
        assert st["converged"]
        assert np.allclose(st["reaction"], [0.0, 0.0, 0.8], atol=1e-8)

    def test_release_returns_to_rest(self):
        s = _loaded_session()
        rest = np.array(s.assembler.mesh.vertices).ravel()
        free = [v for v in np.unique(s.assembler.mesh.facets)
                if v not in s.clamped_nodes]
        s.set_probe(vertex=int(free[0]), force=(0.0, 0.0, -1.0))
        s.step()
        s.set_probe(vertex=int(free[0]), force=(0.0, 0.0, 0.0))
        st = s.step()
        assert np.abs(np.array(st["positions"]) - rest).max() < 1e-10

    def test_path_independence_of_equilibrium(self):
        """Quasi-static hyperelasticity: the converged state for a force is
        independent of the ramp history."""
        target = (0.0, -1.2, 0.6)
        states = []
        for ramp in ([0.25, 0.5, 1.0], [1.0]):
            s = _loaded_session()
            free = [v for v in np.unique(s.assembler.mesh.facets)
                    if v not in s.clamped_nodes]
            v = int(free[len(free) // 2])
            for f in ramp:
                s.set_probe(vertex=v, force=tuple(np.array(target) * f))
                st = s.step()
                assert st["converged"]
            states.append(np.array(st["positions"]))
        diff = np.linalg.norm(states[0] - states[1]) / np.linalg.norm(states[1])
        assert diff < 1e-9

    def test_reset_clears_probe_and_state(self):
        s = _loaded_session()
        free = [v for v in np.unique(s.assembler.mesh.facets)
                if v not in s.clamped_nodes]
        s.set_probe(vertex=int(free[0]), force=(0, 0, -1))
        s.step()
        st = s.reset()
        rest = np.array(s.assembler.mesh.vertices).ravel()
        assert np.array_equal(np.array(st["positions"]), rest)
        assert s.probe_vertex is None


class TestHandleMessage:
    def test_malformed_json(self):
        s = Session()
        r = handle_message(s, "{not json")
        assert r["type"] == "error" and "JSON" in r["message"]

    def test_unknown_type(self):
        s = Session()
        r = handle_message(s, json.dumps({"type": "warp_drive"}))
        assert r["type"] == "error"

    def test_wrong_version(self):
        s = Session()
        r = handle_message(s, json.dumps({"type": "step", "v": 2}))
        assert r["type"] == "error" and "version" in r["message"]

    def test_step_without_scene(self):
        s = Session()
        r = handle_message(s, json.dumps({"type": "step"}))
        assert r["type"] == "error" and "no scene" in r["message"]


def _free_port():
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


@pytest.fixture()
def live_server(tmp_path):
    from websockets.asyncio.server import serve

    port = _free_port()
    started = threading.Event()
    stop_holder = {}

    (tmp_path / "index.html").write_text("<html>probe ui</html>")

    async def amain():
        from hyperfem.service import _static_responder

        async def handler(ws):
            session = Session()
            async for raw in ws:
                reply = await asyncio.to_thread(handle_message, session, raw)
                await ws.send(json.dumps(reply))

        async with serve(handler, "127.0.0.1", port,
                         process_request=_static_responder(tmp_path)) as server:
            stop_holder["loop"] = asyncio.get_running_loop()
            stop_holder["stop"] = asyncio.Event()
            started.set()
            await stop_holder["stop"].wait()

    t = threading.Thread(target=lambda: asyncio.run(amain()), daemon=True)
    t.start()
    assert started.wait(10)
    yield port
    stop_holder["loop"].call_soon_threadsafe(stop_holder["stop"].set)
    t.join(timeout=10)


class TestWebSocket:
    def test_full_session_over_socket(self, live_server):
        from websockets.sync.client import connect
        with connect(f"ws://127.0.0.1:{live_server}") as ws:
            ws.send(json.dumps({"type": "load_scene", "mesh": BEAM_SCENE,
                                "material": STVK, "clamp": "clamp"}))
            scene = json.loads(ws.recv())
            assert scene["type"] == "scene" and scene["v"] == 1
            ws.send(json.dumps({"type": "step"}))
            state = json.loads(ws.recv())
            assert state["type"] == "state" and state["converged"]
            assert state["positions"] == scene["rest_positions"]

    def test_transcript_replays_identically(self, live_server):
        from websockets.sync.client import connect
        lines = [json.loads(l) for l in
                 (DATA / "session_transcript.jsonl").read_text().splitlines()]
        recorded_backend = lines[0]["backend"]
        exact = recorded_backend == hyperfem.kernel_backend
        pairs = [(lines[i]["send"], lines[i + 1]["recv"])
                 for i in range(1, len(lines), 2)]
        with connect(f"ws://127.0.0.1:{live_server}", max_size=2 ** 24) as ws:
            for send, expect in pairs:
                ws.send(json.dumps(send))
                got = json.loads(ws.recv())
                if got.get("type") == "state":
                    got["ms"] = 0.0
                if exact:
                    assert got == expect, f"mismatch replying to {send['type']}"
                else:  # cross-lane replay: same structure, positions to 1e-12
                    assert got.keys() == expect.keys()
                    for k, v in expect.items():
                        if k in ("positions", "rest_positions", "reaction"):
                            assert np.allclose(got[k], v, rtol=1e-12, atol=1e-12)
                        else:
                            assert got[k] == v

    def test_static_files_served(self, live_server):
        with urllib.request.urlopen(
                f"http://127.0.0.1:{live_server}/index.html") as resp:
            body = resp.read().decode()
        assert "probe ui" in body
        req = urllib.request.Request(f"http://127.0.0.1:{live_server}/nope.js")
        with pytest.raises(urllib.error.HTTPError) as err:
            urllib.request.urlopen(req)
        assert err.value.code == 404

    def test_sessions_are_independent(self, live_server):
        from websockets.sync.client import connect
        with connect(f"ws://127.0.0.1:{live_server}") as a, \
                connect(f"ws://127.0.0.1:{live_server}") as b:
            a.send(json.dumps({"type": "load_scene", "mesh": BEAM_SCENE,
                               "material": STVK}))
            json.loads(a.recv())
            # second session has no scene: its step must error while the
            # first one keeps working
            b.send(json.dumps({"type": "step"}))
            assert json.loads(b.recv())["type"] == "error"
            a.send(json.dumps({"type": "step"}))
            assert json.loads(a.recv())["type"] == "state"


class TestHolzapfelOgdenDemoScene:
    def test_liver_with_ho_material_accepted(self):
        """The demo-scale liver scene with the orthotropic model loads and
        probes interactively."""
        s = Session()
        scene = s.load_scene(
            {"builtin": "liver"},
            {"builtin": "holzapfel_ogden",
             "params": {"a": 59.0, "b": 8.023, "a_f": 18472.0, "b_f": 16.026,
                        "a_s": 2481.0, "b_s": 11.12, "a_fs": 216.0,
                        "b_fs": 11.436, "kappa": 1.0e4},
             "fibers": {"f0": [1.0, 0.0, 0.0], "s0": [0.0, 1.0, 0.0]}})
        assert scene["dofs"] == 546  # demo regime around the 543-DOF scale
        free = [v for v in np.unique(s.assembler.mesh.facets)
                if v not in s.clamped_nodes]
        s.set_probe(vertex=int(free[0]), force=(0.0, 0.0, -0.05))
        st = s.step()
        assert st["converged"]
