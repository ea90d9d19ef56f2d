/** Protocol v1 frames exchanged with the probing service. */

export const PROTOCOL_VERSION = 1;

export interface LoadSceneMsg {
  type: "load_scene";
  v: number;
  mesh: Record<string, unknown>;
  material: Record<string, unknown>;
  clamp?: string;
}

export interface SetProbeMsg {
  type: "set_probe";
  v: number;
  vertex?: number;
  point?: [number, number, number];
  force: [number, number, number];
}

export interface StepMsg {
  type: "step";
  v: number;
}

export interface ResetMsg {
  type: "reset";
  v: number;
}

export type ClientMessage = LoadSceneMsg | SetProbeMsg | StepMsg | ResetMsg;

export interface SceneFrame {
  type: "scene";
  v: number;
  nv: number;
  nc: number;
  dofs: number;
  family: string;
  rest_positions: number[];
  triangles: number[];
  clamped: number[];
}

export interface StateFrame {
  type: "state";
  v: number;
  positions: number[];
  reaction: [number, number, number];
  iters: number;
  ms: number;
  converged: boolean;
}

export interface AckFrame {
  type: "ack";
  v: number;
  vertex: number;
  force: [number, number, number];
}

export interface ErrorFrame {
  type: "error";
  v: number;
  message: string;
}

export type ServerFrame = SceneFrame | StateFrame | AckFrame | ErrorFrame;

function isNumberArray(x: unknown, len?: number): x is number[] {
  return Array.isArray(x) && (len === undefined || x.length === len) &&
    x.every((v) => typeof v === "number" && Number.isFinite(v));
}

/** Parse and validate one server frame; null for anything malformed. */
export function parseServerFrame(raw: string): ServerFrame | null {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof data !== "object" || data === null) return null;
  const f = data as Record<string, unknown>;
  if (f.v !== PROTOCOL_VERSION) return null;
  switch (f.type) {
    case "scene":
      if (
        typeof f.nv === "number" &&
        isNumberArray(f.rest_positions, 3 * (f.nv as number)) &&
        isNumberArray(f.triangles) &&
        isNumberArray(f.clamped)
      ) {
        return f as unknown as SceneFrame;
      }
      return null;
    case "state":
      if (
        isNumberArray(f.positions) &&
        isNumberArray(f.reaction, 3) &&
        typeof f.iters === "number" &&
        typeof f.ms === "number" &&
        typeof f.converged === "boolean"
      ) {
        return f as unknown as StateFrame;
      }
      return null;
    case "ack":
      if (typeof f.vertex === "number") return f as unknown as AckFrame;
      return null;
    case "error":
      if (typeof f.message === "string") return f as unknown as ErrorFrame;
      return null;
    default:
      return null;
  }
}

export function loadSceneMsg(
  mesh: Record<string, unknown>,
  material: Record<string, unknown>,
  clamp = "clamp",
): LoadSceneMsg {
  return { type: "load_scene", v: PROTOCOL_VERSION, mesh, material, clamp };
}

export function setProbeMsg(
  vertex: number,
  force: [number, number, number],
): SetProbeMsg {
  return { type: "set_probe", v: PROTOCOL_VERSION, vertex, force };
}

export function stepMsg(): StepMsg {
  return { type: "step", v: PROTOCOL_VERSION };
}

export function resetMsg(): ResetMsg {
  return { type: "reset", v: PROTOCOL_VERSION };
}
