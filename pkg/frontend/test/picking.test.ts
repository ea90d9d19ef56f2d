import { describe, expect, it } from "vitest";

import { dragToForce, pickVertex, surfaceVertices } from "../src/picking.js";

// trivial orthographic projector: world xy -> pixels, z is depth
const ortho = (p: [number, number, number]): [number, number, number] | null =>
  p[2] < -5 ? null : [p[0] * 100, p[1] * 100, p[2]];

describe("pickVertex", () => {
  const positions = new Float32Array([
    0, 0, 0,
    1, 0, 0,
    0, 1, 0,
    5, 5, 0,
  ]);

  it("picks the nearest projected vertex", () => {
    const hit = pickVertex([98, 2], positions, [0, 1, 2, 3], ortho);
    expect(hit?.vertex).toBe(1);
  });

  it("respects the pixel radius", () => {
    expect(pickVertex([300, 300], positions, [0, 1, 2, 3], ortho, 30)).toBeNull();
  });

  it("skips vertices behind the camera", () => {
    const pos = new Float32Array([0, 0, -10, 0.1, 0, 0]);
    const hit = pickVertex([0, 0], pos, [0, 1], ortho);
    expect(hit?.vertex).toBe(1);
  });

  it("only considers the given candidates", () => {
    const hit = pickVertex([98, 2], positions, [0, 2], ortho, 1e9);
    expect(hit?.vertex).toBe(0);
  });
});

describe("surfaceVertices", () => {
  it("deduplicates and sorts", () => {
    expect(surfaceVertices(new Uint32Array([3, 1, 3, 2, 1, 0]))).toEqual([0, 1, 2, 3]);
  });
});

describe("dragToForce", () => {
  const right: [number, number, number] = [1, 0, 0];
  const up: [number, number, number] = [0, 1, 0];

  it("zero drag means zero force", () => {
    const f = dragToForce([10, 10], [10, 10], [800, 600], right, up, 1);
    expect(f).toEqual([0, 0, 0]);
  });

  it("full-window drag equals the slider magnitude", () => {
    const f = dragToForce([0, 300], [800, 300], [800, 600], right, up, 1);
    expect(Math.hypot(...f)).toBeCloseTo(1);
    expect(f[0]).toBeCloseTo(1);
  });

  it("screen-up maps to world-up", () => {
    const f = dragToForce([400, 500], [400, 100], [800, 600], right, up, 2);
    expect(f[1]).toBeGreaterThan(0);
  });

  it("uses the camera basis", () => {
    const f = dragToForce([0, 0], [400, 0], [800, 800],
      [0, 0, -1], [0, 1, 0], 1);
    expect(f[2]).toBeCloseTo(-0.5);
  });
});
