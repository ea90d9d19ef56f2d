/** Application wiring: connection, scene lifecycle, pointer interaction. */

import { OrbitCamera } from "./camera.js";
import { dragToForce, pickVertex, surfaceVertices } from "./picking.js";
import {
  loadSceneMsg,
  parseServerFrame,
  resetMsg,
  ServerFrame,
} from "./protocol.js";
import { Renderer } from "./renderer.js";
import { ClientScene } from "./scene.js";
import { StatsPanel } from "./stats.js";
import { Connection, ProbeLoop } from "./transport.js";

const SCENES: Record<string, { mesh: object; material: object }> = {
  liver: {
    mesh: { builtin: "liver" },
    material: { builtin: "neo_hookean", params: { young: 3000.0, poisson: 0.3 } },
  },
  beam: {
    mesh: { builtin: "beam", nx: 6, ny: 2, nz: 2, family: "q1" },
    material: { builtin: "stvk", params: { young: 3000.0, poisson: 0.3 } },
  },
};

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

class App {
  private canvas = el<HTMLCanvasElement>("view");
  private banner = el<HTMLDivElement>("banner");
  private stats = new StatsPanel(el<HTMLDivElement>("stats"));
  private renderer = new Renderer(this.canvas);
  private scene: ClientScene | null = null;
  private conn: Connection;
  private loop: ProbeLoop;
  private surface: number[] = [];
  private dragging: { vertex: number; startPx: [number, number] } | null = null;
  private orbiting: [number, number] | null = null;

  constructor() {
    const url = `ws://${location.host || "127.0.0.1:8787"}/ws`;
    this.conn = new Connection(url, parseServerFrame);
    this.loop = new ProbeLoop(this.conn);
    this.conn.onframe = (f) => this.onFrame(f);
    this.conn.onmalformed = () => this.showBanner("malformed server frame dropped");
    this.conn.onstatus = (s) => {
      if (s === "closed") this.showBanner("connection lost", true);
      if (s === "open") {
        this.hideBanner();
        this.loadScene(el<HTMLSelectElement>("scene").value);
      }
    };
    this.wireUi();
    this.conn.connect();
    const tick = () => {
      this.resize();
      this.renderer.draw(this.scene);
      requestAnimationFrame(tick);
    };
    requestAnimationFrame(tick);
  }

  private wireUi(): void {
    el<HTMLSelectElement>("scene").onchange = (ev) =>
      this.loadScene((ev.target as HTMLSelectElement).value);
    el<HTMLButtonElement>("reset").onclick = () => {
      this.loop.clear();
      this.conn.send(resetMsg());
      if (this.scene) this.scene.probe = null;
    };
    el<HTMLButtonElement>("retry").onclick = () => this.conn.connect();
    el<HTMLInputElement>("colormap").onchange = (ev) => {
      this.renderer.colorByDisplacement = (ev.target as HTMLInputElement).checked;
    };
    this.canvas.addEventListener("pointerdown", (ev) => this.pointerDown(ev));
    this.canvas.addEventListener("pointermove", (ev) => this.pointerMove(ev));
    this.canvas.addEventListener("pointerup", (ev) => this.pointerUp(ev));
    this.canvas.addEventListener("wheel", (ev) => {
      ev.preventDefault();
      this.renderer.camera.zoom(ev.deltaY > 0 ? 1.1 : 0.9);
    });
  }

  private loadScene(name: string): void {
    const choice = SCENES[name] ?? SCENES.liver;
    this.scene = null;
    this.loop.clear();
    this.conn.send(
      loadSceneMsg(
        choice.mesh as Record<string, unknown>,
        choice.material as Record<string, unknown>,
      ),
    );
  }

  private onFrame(frame: ServerFrame): void {
    this.loop.onFrame(frame);
    switch (frame.type) {
      case "scene":
        this.scene = new ClientScene(frame);
        this.surface = surfaceVertices(this.scene.triangles);
        this.renderer.frameScene(this.scene);
        this.stats.update(null);
        this.hideBanner();
        break;
      case "state":
        if (this.scene) {
          if (!this.scene.applyState(frame)) {
            this.showBanner("state frame length mismatch; frame dropped");
            break;
          }
          this.stats.update(this.scene.stats);
        }
        break;
      case "ack":
        if (this.scene && this.scene.probe) {
          this.scene.probe.vertex = frame.vertex; // server-confirmed snap
        }
        break;
      case "error":
        this.showBanner(frame.message);
        break;
    }
  }

  private projector() {
    return this.renderer.camera.projector(
      this.renderer.projectionMatrix(),
      this.canvas.width,
      this.canvas.height,
    );
  }

  private pointerDown(ev: PointerEvent): void {
    if (this.scene === null) return;
    const px: [number, number] = [ev.offsetX, ev.offsetY];
    const hit = pickVertex(px, this.scene.currentPositions, this.surface, this.projector());
    if (hit === null) {
      this.orbiting = px;
      return;
    }
    if (this.scene.clamped.has(hit.vertex)) {
      this.canvas.classList.add("shake");
      setTimeout(() => this.canvas.classList.remove("shake"), 350);
      this.showBanner("that vertex is clamped; pick a free one");
      return;
    }
    this.canvas.setPointerCapture(ev.pointerId);
    this.dragging = { vertex: hit.vertex, startPx: px };
    this.scene.probe = { vertex: hit.vertex, force: [0, 0, 0] };
  }

  private pointerMove(ev: PointerEvent): void {
    if (this.orbiting) {
      this.renderer.camera.rotate(ev.offsetX - this.orbiting[0], ev.offsetY - this.orbiting[1]);
      this.orbiting = [ev.offsetX, ev.offsetY];
      return;
    }
    if (this.dragging === null || this.scene === null) return;
    const { right, up } = this.renderer.camera.basis();
    const slider = Number(el<HTMLInputElement>("stiffness").value);
    const force = dragToForce(
      this.dragging.startPx,
      [ev.offsetX, ev.offsetY],
      [this.canvas.width, this.canvas.height],
      right,
      up,
      slider,
    );
    this.scene.probe = { vertex: this.dragging.vertex, force };
    this.loop.request(this.dragging.vertex, force);
  }

  private pointerUp(_ev: PointerEvent): void {
    this.orbiting = null;
    if (this.dragging === null || this.scene === null) return;
    // ramp the force back to zero so the body returns to rest
    this.loop.request(this.dragging.vertex, [0, 0, 0]);
    this.scene.probe = null;
    this.dragging = null;
  }

  private resize(): void {
    const w = this.canvas.clientWidth, h = this.canvas.clientHeight;
    if (this.canvas.width !== w || this.canvas.height !== h) {
      this.canvas.width = w;
      this.canvas.height = h;
    }
  }

  private showBanner(message: string, retry = false): void {
    this.banner.textContent = message;
    this.banner.style.display = "block";
    el<HTMLButtonElement>("retry").style.display = retry ? "inline-block" : "none";
  }

  private hideBanner(): void {
    this.banner.style.display = "none";
    el<HTMLButtonElement>("retry").style.display = "none";
  }
}

new App();
