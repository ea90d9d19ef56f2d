import { describe, expect, it } from "vitest";

import { ClientMessage, ServerFrame } from "../src/protocol.js";
import { ProbeLoop } from "../src/transport.js";

function stateFrame(): ServerFrame {
  return {
    type: "state", v: 1, positions: [], reaction: [0, 0, 0],
    iters: 1, ms: 1, converged: true,
  };
}

describe("ProbeLoop throttling", () => {
  it("sends set_probe followed by step", () => {
    const sent: ClientMessage[] = [];
    const loop = new ProbeLoop({ send: (m) => sent.push(m) });
    loop.request(7, [0, 0, -1]);
    expect(sent.map((m) => m.type)).toEqual(["set_probe", "step"]);
  });

  it("keeps at most one step in flight under fast dragging", () => {
    const sent: ClientMessage[] = [];
    const loop = new ProbeLoop({ send: (m) => sent.push(m) });
    for (let i = 0; i < 50; i++) loop.request(7, [0, 0, -i]);
    expect(sent.filter((m) => m.type === "step").length).toBe(1);
    expect(loop.stepInFlight).toBe(true);
  });

  it("coalesces to the latest force once the reply lands", () => {
    const sent: ClientMessage[] = [];
    const loop = new ProbeLoop({ send: (m) => sent.push(m) });
    loop.request(7, [0, 0, -1]);
    loop.request(7, [0, 0, -2]);
    loop.request(7, [0, 0, -3]);
    loop.onFrame(stateFrame());
    const probes = sent.filter((m) => m.type === "set_probe");
    expect(probes.length).toBe(2);
    expect((probes[1] as { force: number[] }).force).toEqual([0, 0, -3]);
    expect(sent.filter((m) => m.type === "step").length).toBe(2);
  });

  it("frees the slot after an error reply too", () => {
    const sent: ClientMessage[] = [];
    const loop = new ProbeLoop({ send: (m) => sent.push(m) });
    loop.request(1, [0, 0, 0]);
    loop.onFrame({ type: "error", v: 1, message: "nope" });
    expect(loop.stepInFlight).toBe(false);
    loop.request(1, [0, 1, 0]);
    expect(sent.filter((m) => m.type === "step").length).toBe(2);
  });

  it("ignores ack frames for throttling purposes", () => {
    const sent: ClientMessage[] = [];
    const loop = new ProbeLoop({ send: (m) => sent.push(m) });
    loop.request(1, [0, 0, -1]);
    loop.request(1, [0, 0, -2]);
    loop.onFrame({ type: "ack", v: 1, vertex: 1, force: [0, 0, -1] });
    expect(sent.filter((m) => m.type === "step").length).toBe(1);
  });

  it("clear drops queued work", () => {
    const sent: ClientMessage[] = [];
    const loop = new ProbeLoop({ send: (m) => sent.push(m) });
    loop.request(1, [0, 0, -1]);
    loop.request(1, [0, 0, -2]);
    loop.clear();
    loop.onFrame(stateFrame());
    expect(sent.filter((m) => m.type === "step").length).toBe(1);
  });
});
