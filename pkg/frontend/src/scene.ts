/** Client-side scene state: geometry mirrors of the server, never physics.
 *
 * All positions come from server frames; the client only stores and
 * displays them.  A state frame whose length disagrees with the scene is
 * rejected (frame dropped, error reported) rather than partially applied.
 */

import { SceneFrame, StateFrame } from "./protocol.js";

export interface ProbeMarker {
  vertex: number;
  force: [number, number, number];
}

export interface Stats {
  iters: number;
  ms: number;
  converged: boolean;
  reaction: [number, number, number];
}

export class ClientScene {
  readonly nv: number;
  readonly restPositions: Float32Array;
  readonly currentPositions: Float32Array;
  readonly triangles: Uint32Array;
  readonly clamped: Set<number>;
  probe: ProbeMarker | null = null;
  stats: Stats | null = null;
  /** true while the last state frame reported non-convergence */
  warning = false;

  constructor(frame: SceneFrame) {
    this.nv = frame.nv;
    this.restPositions = new Float32Array(frame.rest_positions);
    this.currentPositions = new Float32Array(frame.rest_positions);
    this.triangles = new Uint32Array(frame.triangles);
    this.clamped = new Set(frame.clamped);
  }

  /** Apply a state frame; returns false (and changes nothing) on length
   * mismatch. Non-converged frames update stats and set the warning tint
   * but keep the last good geometry. */
  applyState(frame: StateFrame): boolean {
    if (frame.positions.length !== this.restPositions.length) {
      return false;
    }
    this.stats = {
      iters: frame.iters,
      ms: frame.ms,
      converged: frame.converged,
      reaction: frame.reaction,
    };
    this.warning = !frame.converged;
    if (frame.converged) {
      this.currentPositions.set(frame.positions);
    }
    return true;
  }

  /** Max displacement magnitude over the vertices (for the color map). */
  maxDisplacement(): number {
    let best = 0;
    for (let i = 0; i < this.nv; i++) {
      const dx = this.currentPositions[3 * i] - this.restPositions[3 * i];
      const dy = this.currentPositions[3 * i + 1] - this.restPositions[3 * i + 1];
      const dz = this.currentPositions[3 * i + 2] - this.restPositions[3 * i + 2];
      best = Math.max(best, Math.hypot(dx, dy, dz));
    }
    return best;
  }

  displacementOf(vertex: number): number {
    const dx = this.currentPositions[3 * vertex] - this.restPositions[3 * vertex];
    const dy = this.currentPositions[3 * vertex + 1] - this.restPositions[3 * vertex + 1];
    const dz = this.currentPositions[3 * vertex + 2] - this.restPositions[3 * vertex + 2];
    return Math.hypot(dx, dy, dz);
  }

  /** Geometric center and radius of the rest shape (camera framing). */
  bounds(): { center: [number, number, number]; radius: number } {
    const lo = [Infinity, Infinity, Infinity];
    const hi = [-Infinity, -Infinity, -Infinity];
    for (let i = 0; i < this.nv; i++) {
      for (let d = 0; d < 3; d++) {
        lo[d] = Math.min(lo[d], this.restPositions[3 * i + d]);
        hi[d] = Math.max(hi[d], this.restPositions[3 * i + d]);
      }
    }
    const center: [number, number, number] = [
      (lo[0] + hi[0]) / 2,
      (lo[1] + hi[1]) / 2,
      (lo[2] + hi[2]) / 2,
    ];
    const radius =
      Math.hypot(hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]) / 2 || 1;
    return { center, radius };
  }
}
