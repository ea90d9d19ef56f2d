/** WebSocket transport with acknowledgment-throttled stepping.
 *
 * The probe loop guarantees at most one step request in flight: a new
 * probe force arriving while a step awaits its state reply is queued, and
 * only the latest queued value is sent once the reply lands.  That keeps
 * fast dragging from piling up solves on a slow server.
 */

import {
  ClientMessage,
  ServerFrame,
  setProbeMsg,
  stepMsg,
} from "./protocol.js";

export interface FrameSink {
  send(msg: ClientMessage): void;
}

export class ProbeLoop {
  private inFlight = false;
  private queued: { vertex: number; force: [number, number, number] } | null =
    null;

  constructor(private sink: FrameSink) {}

  get stepInFlight(): boolean {
    return this.inFlight;
  }

  /** Request a solve for this probe state (coalesces under throttling). */
  request(vertex: number, force: [number, number, number]): void {
    this.queued = { vertex, force };
    this.pump();
  }

  /** Feed every incoming server frame here. */
  onFrame(frame: ServerFrame): void {
    if (frame.type === "state" || frame.type === "error") {
      this.inFlight = false;
      this.pump();
    }
  }

  /** Drop any queued work (scene reload / reset). */
  clear(): void {
    this.queued = null;
    this.inFlight = false;
  }

  private pump(): void {
    if (this.inFlight || this.queued === null) return;
    const { vertex, force } = this.queued;
    this.queued = null;
    this.sink.send(setProbeMsg(vertex, force));
    this.sink.send(stepMsg());
    this.inFlight = true;
  }
}

export type ConnectionStatus = "connecting" | "open" | "closed";

export class Connection implements FrameSink {
  private ws: WebSocket | null = null;
  status: ConnectionStatus = "closed";
  onframe: (frame: ServerFrame) => void = () => {};
  onmalformed: (raw: string) => void = () => {};
  onstatus: (status: ConnectionStatus) => void = () => {};

  constructor(private url: string, private parse: (raw: string) => ServerFrame | null) {}

  connect(): void {
    this.status = "connecting";
    this.onstatus(this.status);
    this.ws = new WebSocket(this.url);
    this.ws.onopen = () => {
      this.status = "open";
      this.onstatus(this.status);
    };
    this.ws.onclose = () => {
      this.status = "closed";
      this.onstatus(this.status);
    };
    this.ws.onerror = () => {
      this.status = "closed";
      this.onstatus(this.status);
    };
    this.ws.onmessage = (ev) => {
      const frame = this.parse(String(ev.data));
      if (frame === null) {
        this.onmalformed(String(ev.data));
        return;
      }
      this.onframe(frame);
    };
  }

  send(msg: ClientMessage): void {
    if (this.ws && this.ws.readyState === WebSocket.OPEN) {
      this.ws.send(JSON.stringify(msg));
    }
  }
}
