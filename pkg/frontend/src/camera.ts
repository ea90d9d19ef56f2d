/** Minimal column-major mat4 math and an orbit camera. */

export type Mat4 = Float32Array;
export type Vec3 = [number, number, number];

export function mat4Multiply(a: Mat4, b: Mat4): Mat4 {
  const out = new Float32Array(16);
  for (let c = 0; c < 4; c++) {
    for (let r = 0; r < 4; r++) {
      let s = 0;
      for (let k = 0; k < 4; k++) s += a[k * 4 + r] * b[c * 4 + k];
      out[c * 4 + r] = s;
    }
  }
  return out;
}

export function perspective(fovY: number, aspect: number, near: number, far: number): Mat4 {
  const f = 1 / Math.tan(fovY / 2);
  const out = new Float32Array(16);
  out[0] = f / aspect;
  out[5] = f;
  out[10] = (far + near) / (near - far);
  out[11] = -1;
  out[14] = (2 * far * near) / (near - far);
  return out;
}

function sub(a: Vec3, b: Vec3): Vec3 {
  return [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
}

function cross(a: Vec3, b: Vec3): Vec3 {
  return [
    a[1] * b[2] - a[2] * b[1],
    a[2] * b[0] - a[0] * b[2],
    a[0] * b[1] - a[1] * b[0],
  ];
}

function normalize(a: Vec3): Vec3 {
  const n = Math.hypot(a[0], a[1], a[2]) || 1;
  return [a[0] / n, a[1] / n, a[2] / n];
}

export function lookAt(eye: Vec3, center: Vec3, upHint: Vec3): Mat4 {
  const z = normalize(sub(eye, center));
  const x = normalize(cross(upHint, z));
  const y = cross(z, x);
  const out = new Float32Array(16);
  out.set([x[0], y[0], z[0], 0, x[1], y[1], z[1], 0, x[2], y[2], z[2], 0, 0, 0, 0, 1]);
  out[12] = -(x[0] * eye[0] + x[1] * eye[1] + x[2] * eye[2]);
  out[13] = -(y[0] * eye[0] + y[1] * eye[1] + y[2] * eye[2]);
  out[14] = -(z[0] * eye[0] + z[1] * eye[1] + z[2] * eye[2]);
  return out;
}

/** Spherical orbit around a target point. */
export class OrbitCamera {
  azimuth = 0.7;
  elevation = 0.4;
  distance = 3;
  target: Vec3 = [0, 0, 0];

  frame(center: Vec3, radius: number): void {
    this.target = center;
    this.distance = radius * 2.6;
  }

  eye(): Vec3 {
    const ce = Math.cos(this.elevation);
    return [
      this.target[0] + this.distance * ce * Math.cos(this.azimuth),
      this.target[1] + this.distance * Math.sin(this.elevation),
      this.target[2] + this.distance * ce * Math.sin(this.azimuth),
    ];
  }

  view(): Mat4 {
    return lookAt(this.eye(), this.target, [0, 1, 0]);
  }

  /** Camera-plane basis vectors for drag-to-force mapping. */
  basis(): { right: Vec3; up: Vec3 } {
    const v = this.view();
    return {
      right: [v[0], v[4], v[8]],
      up: [v[1], v[5], v[9]],
    };
  }

  rotate(dxPx: number, dyPx: number): void {
    this.azimuth += dxPx * 0.008;
    this.elevation = Math.min(1.5, Math.max(-1.5, this.elevation + dyPx * 0.008));
  }

  zoom(factor: number): void {
    this.distance = Math.max(1e-3, this.distance * factor);
  }

  /** World -> pixel projection for picking; null behind the camera. */
  projector(
    proj: Mat4,
    widthPx: number,
    heightPx: number,
  ): (p: Vec3) => [number, number, number] | null {
    const vp = mat4Multiply(proj, this.view());
    return (p: Vec3) => {
      const x = vp[0] * p[0] + vp[4] * p[1] + vp[8] * p[2] + vp[12];
      const y = vp[1] * p[0] + vp[5] * p[1] + vp[9] * p[2] + vp[13];
      const w = vp[3] * p[0] + vp[7] * p[1] + vp[11] * p[2] + vp[15];
      if (w <= 0) return null;
      return [((x / w) * 0.5 + 0.5) * widthPx, (1 - ((y / w) * 0.5 + 0.5)) * heightPx, w];
    };
  }
}
