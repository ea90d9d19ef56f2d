/** Dependency-free WebGL renderer for the deformable surface.
 *
 * Draws the triangulated surface with per-vertex colors (clamped region
 * tinted, optional displacement color map, warning tint on non-converged
 * frames) plus the probe marker and its force arrow.
 */

import { Mat4, OrbitCamera, mat4Multiply, perspective } from "./camera.js";
import { ClientScene } from "./scene.js";

const MESH_VS = `
attribute vec3 aPos;
attribute vec3 aNormal;
attribute vec3 aColor;
uniform mat4 uMvp;
varying vec3 vNormal;
varying vec3 vColor;
void main() {
  gl_Position = uMvp * vec4(aPos, 1.0);
  vNormal = aNormal;
  vColor = aColor;
}`;

const MESH_FS = `
precision mediump float;
varying vec3 vNormal;
varying vec3 vColor;
uniform vec3 uLightDir;
void main() {
  float lambert = 0.35 + 0.65 * abs(dot(normalize(vNormal), uLightDir));
  gl_FragColor = vec4(vColor * lambert, 1.0);
}`;

const LINE_VS = `
attribute vec3 aPos;
uniform mat4 uMvp;
uniform float uPointSize;
void main() {
  gl_Position = uMvp * vec4(aPos, 1.0);
  gl_PointSize = uPointSize;
}`;

const LINE_FS = `
precision mediump float;
uniform vec3 uColor;
void main() { gl_FragColor = vec4(uColor, 1.0); }`;

function compile(gl: WebGLRenderingContext, kind: number, src: string): WebGLShader {
  const sh = gl.createShader(kind)!;
  gl.shaderSource(sh, src);
  gl.compileShader(sh);
  if (!gl.getShaderParameter(sh, gl.COMPILE_STATUS)) {
    throw new Error(gl.getShaderInfoLog(sh) ?? "shader compile failed");
  }
  return sh;
}

function program(gl: WebGLRenderingContext, vs: string, fs: string): WebGLProgram {
  const p = gl.createProgram()!;
  gl.attachShader(p, compile(gl, gl.VERTEX_SHADER, vs));
  gl.attachShader(p, compile(gl, gl.FRAGMENT_SHADER, fs));
  gl.linkProgram(p);
  if (!gl.getProgramParameter(p, gl.LINK_STATUS)) {
    throw new Error(gl.getProgramInfoLog(p) ?? "link failed");
  }
  return p;
}

export class Renderer {
  readonly camera = new OrbitCamera();
  colorByDisplacement = false;
  private gl: WebGLRenderingContext;
  private meshProg: WebGLProgram;
  private lineProg: WebGLProgram;
  private buffers: { pos: WebGLBuffer; normal: WebGLBuffer; color: WebGLBuffer; marker: WebGLBuffer };
  private vertexCount = 0;

  constructor(private canvas: HTMLCanvasElement) {
    const gl = canvas.getContext("webgl");
    if (!gl) throw new Error("WebGL unavailable");
    this.gl = gl;
    this.meshProg = program(gl, MESH_VS, MESH_FS);
    this.lineProg = program(gl, LINE_VS, LINE_FS);
    this.buffers = {
      pos: gl.createBuffer()!,
      normal: gl.createBuffer()!,
      color: gl.createBuffer()!,
      marker: gl.createBuffer()!,
    };
    gl.enable(gl.DEPTH_TEST);
  }

  frameScene(scene: ClientScene): void {
    const b = scene.bounds();
    this.camera.frame(b.center, b.radius);
  }

  projectionMatrix(): Mat4 {
    const aspect = this.canvas.width / Math.max(1, this.canvas.height);
    return perspective(0.9, aspect, this.camera.distance * 0.01, this.camera.distance * 40);
  }

  /** Expand indexed triangles into flat-shaded soup and draw everything. */
  draw(scene: ClientScene | null): void {
    const gl = this.gl;
    gl.viewport(0, 0, this.canvas.width, this.canvas.height);
    gl.clearColor(0.09, 0.1, 0.12, 1.0);
    gl.clear(gl.COLOR_BUFFER_BIT | gl.DEPTH_BUFFER_BIT);
    if (scene === null) return;

    const tris = scene.triangles;
    const pos = scene.currentPositions;
    const n = tris.length;
    const soup = new Float32Array(n * 3);
    const normals = new Float32Array(n * 3);
    const colors = new Float32Array(n * 3);
    const maxDisp = this.colorByDisplacement ? scene.maxDisplacement() || 1 : 1;

    for (let t = 0; t < n / 3; t++) {
      const [a, b, c] = [tris[3 * t], tris[3 * t + 1], tris[3 * t + 2]];
      const pa = [pos[3 * a], pos[3 * a + 1], pos[3 * a + 2]];
      const pb = [pos[3 * b], pos[3 * b + 1], pos[3 * b + 2]];
      const pc = [pos[3 * c], pos[3 * c + 1], pos[3 * c + 2]];
      const ux = pb[0] - pa[0], uy = pb[1] - pa[1], uz = pb[2] - pa[2];
      const vx = pc[0] - pa[0], vy = pc[1] - pa[1], vz = pc[2] - pa[2];
      let nx = uy * vz - uz * vy, ny = uz * vx - ux * vz, nz = ux * vy - uy * vx;
      const nn = Math.hypot(nx, ny, nz) || 1;
      nx /= nn; ny /= nn; nz /= nn;
      [a, b, c].forEach((v, i) => {
        const o = 9 * t + 3 * i;
        soup[o] = pos[3 * v];
        soup[o + 1] = pos[3 * v + 1];
        soup[o + 2] = pos[3 * v + 2];
        normals[o] = nx; normals[o + 1] = ny; normals[o + 2] = nz;
        let r = 0.78, g = 0.55, bl = 0.45; // tissue-ish base
        if (this.colorByDisplacement) {
          const s = Math.min(1, scene.displacementOf(v) / maxDisp);
          r = 0.25 + 0.75 * s; g = 0.35 * (1 - s) + 0.1; bl = 0.8 * (1 - s);
        }
        if (scene.clamped.has(v)) { r = 0.25; g = 0.45; bl = 0.9; }
        if (scene.warning) { r = Math.min(1, r + 0.25); g *= 0.6; bl *= 0.6; }
        colors[o] = r; colors[o + 1] = g; colors[o + 2] = bl;
      });
    }

    const mvp = mat4Multiply(this.projectionMatrix(), this.camera.view());
    gl.useProgram(this.meshProg);
    gl.uniformMatrix4fv(gl.getUniformLocation(this.meshProg, "uMvp"), false, mvp);
    gl.uniform3f(gl.getUniformLocation(this.meshProg, "uLightDir"), 0.4, 0.8, 0.45);
    const bind = (name: string, buf: WebGLBuffer, data: Float32Array) => {
      const loc = gl.getAttribLocation(this.meshProg, name);
      gl.bindBuffer(gl.ARRAY_BUFFER, buf);
      gl.bufferData(gl.ARRAY_BUFFER, data, gl.DYNAMIC_DRAW);
      gl.enableVertexAttribArray(loc);
      gl.vertexAttribPointer(loc, 3, gl.FLOAT, false, 0, 0);
    };
    bind("aPos", this.buffers.pos, soup);
    bind("aNormal", this.buffers.normal, normals);
    bind("aColor", this.buffers.color, colors);
    gl.drawArrays(gl.TRIANGLES, 0, n);
    this.vertexCount = n;

    if (scene.probe !== null) this.drawProbe(scene, mvp);
  }

  private drawProbe(scene: ClientScene, mvp: Mat4): void {
    const gl = this.gl;
    const v = scene.probe!.vertex;
    const f = scene.probe!.force;
    const p = [
      scene.currentPositions[3 * v],
      scene.currentPositions[3 * v + 1],
      scene.currentPositions[3 * v + 2],
    ];
    const scale = scene.bounds().radius * 0.6;
    const fn = Math.hypot(f[0], f[1], f[2]) || 1;
    const tip = [p[0] + (f[0] / fn) * scale * Math.min(1, fn),
                 p[1] + (f[1] / fn) * scale * Math.min(1, fn),
                 p[2] + (f[2] / fn) * scale * Math.min(1, fn)];
    const data = new Float32Array([...p, ...tip]);
    gl.useProgram(this.lineProg);
    gl.uniformMatrix4fv(gl.getUniformLocation(this.lineProg, "uMvp"), false, mvp);
    gl.uniform1f(gl.getUniformLocation(this.lineProg, "uPointSize"), 9.0);
    gl.uniform3f(gl.getUniformLocation(this.lineProg, "uColor"), 1.0, 0.9, 0.2);
    const loc = gl.getAttribLocation(this.lineProg, "aPos");
    gl.bindBuffer(gl.ARRAY_BUFFER, this.buffers.marker);
    gl.bufferData(gl.ARRAY_BUFFER, data, gl.DYNAMIC_DRAW);
    gl.enableVertexAttribArray(loc);
    gl.vertexAttribPointer(loc, 3, gl.FLOAT, false, 0, 0);
    gl.drawArrays(gl.LINES, 0, 2);
    gl.drawArrays(gl.POINTS, 0, 1);
  }
}
