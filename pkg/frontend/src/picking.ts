/** Screen-space vertex picking and drag-to-force conversion. */

export interface PickResult {
  vertex: number;
  distancePx: number;
}

/**
 * Nearest projected vertex to a pointer position.
 *
 * `project` maps a world position to [xPx, yPx, depth] or null when the
 * point is behind the camera.  Only vertices used by surface triangles
 * are candidates.
 */
export function pickVertex(
  pointerPx: [number, number],
  positions: Float32Array,
  candidates: Iterable<number>,
  project: (p: [number, number, number]) => [number, number, number] | null,
  maxDistancePx = 30,
): PickResult | null {
  let best: PickResult | null = null;
  for (const v of candidates) {
    const proj = project([
      positions[3 * v],
      positions[3 * v + 1],
      positions[3 * v + 2],
    ]);
    if (proj === null) continue;
    const d = Math.hypot(proj[0] - pointerPx[0], proj[1] - pointerPx[1]);
    if (d <= maxDistancePx && (best === null || d < best.distancePx)) {
      best = { vertex: v, distancePx: d };
    }
  }
  return best;
}

/** Vertices referenced by the surface triangulation. */
export function surfaceVertices(triangles: Uint32Array): number[] {
  return [...new Set(triangles)].sort((a, b) => a - b);
}

/**
 * Convert a pointer drag into a probe force.
 *
 * The drag vector lives in the camera plane: `right` and `up` are the
 * camera's world-space basis vectors.  Scaling is chosen so dragging
 * across the full window equals `fullDragNewtons` (slider value, default
 * 1 N).
 */
export function dragToForce(
  fromPx: [number, number],
  toPx: [number, number],
  windowPx: [number, number],
  right: [number, number, number],
  up: [number, number, number],
  fullDragNewtons = 1.0,
): [number, number, number] {
  const span = Math.max(windowPx[0], windowPx[1]);
  const sx = ((toPx[0] - fromPx[0]) / span) * fullDragNewtons;
  // screen y grows downward; world up is the opposite direction
  const sy = (-(toPx[1] - fromPx[1]) / span) * fullDragNewtons;
  return [
    sx * right[0] + sy * up[0],
    sx * right[1] + sy * up[1],
    sx * right[2] + sy * up[2],
  ];
}
