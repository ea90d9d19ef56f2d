"""Record the golden protocol transcript used by the replay test.

Timing fields are normalized to zero (wall-clock is not replayable); the
kernel backend lane is recorded so the replay test knows when bitwise
comparison applies.
"""

import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

import hyperfem  # noqa: E402
from hyperfem.service import Session, handle_message  # noqa: E402

SCRIPT = [
    {"type": "load_scene", "v": 1,
     "mesh": {"builtin": "beam", "nx": 4, "ny": 1, "nz": 1, "family": "q1"},
     "material": {"builtin": "stvk", "params": {"young": 3000.0, "poisson": 0.3}},
     "clamp": "clamp"},
    {"type": "step"},
    {"type": "set_probe", "point": [80.0, 15.0, 15.0], "force": [0.0, 0.0, -2.0]},
    {"type": "step"},
    {"type": "set_probe", "point": [80.0, 15.0, 15.0], "force": [0.0, 0.0, 0.0]},
    {"type": "step"},
    {"type": "reset"},
    {"type": "set_probe", "vertex": 0, "force": [0.0, 0.0, 1.0]},
    {"type": "bogus_kind"},
]


def normalize(frame):
    if frame.get("type") == "state":
        frame = dict(frame)
        frame["ms"] = 0.0
    return frame


def main():
    session = Session()
    lines = [json.dumps({"backend": hyperfem.kernel_backend})]
    for msg in SCRIPT:
        reply = handle_message(session, json.dumps(msg))
        lines.append(json.dumps({"send": msg}))
        lines.append(json.dumps({"recv": normalize(reply)}))
    out = Path(__file__).resolve().parents[1] / "tests/data/session_transcript.jsonl"
    out.write_text("\n".join(lines) + "\n")
    print(f"recorded {len(SCRIPT)} exchanges -> {out}")


if __name__ == "__main__":
    main()
