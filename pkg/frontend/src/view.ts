/**
 * Cross-section renderer: coil outlines, workspace, scene objects, the
 * draggable finger marker, and the optional |B| heatmap underlay.
 *
 * The display geometry is fixed by the rig (six coils, 39 mm pitch, bore
 * radius 115 mm) so it is drawn from constants; scene objects come from
 * the server's scene broadcasts.
 */

import { FieldSliceData, Plane, SceneObjectJson, StateMessage } from "./protocol.js";

const COIL_INNER_R = 0.115;
const COIL_OUTER_R = 0.145;
const COIL_LENGTH = 0.03;
const COIL_CENTERS = [0, 1, 2, 3, 4, 5].map((i) => 0.1125 + (i - 2.5) * 0.039);
export const WORKSPACE_R = 0.105;

// World window of the cross-section view.
const U_MIN = -0.16;
const U_MAX = 0.16;
const Z_MIN = -0.04;
const Z_MAX = 0.28;

export interface ViewInputs {
  plane: Plane;
  scene: SceneObjectJson[];
  latest: StateMessage | null;
  marker: [number, number, number] | null;
  slice: FieldSliceData | null;
  showSlice: boolean;
  stale: boolean;
}

export class CrossSectionView {
  private readonly ctx: CanvasRenderingContext2D;
  private sliceCanvas: HTMLCanvasElement | null = null;
  private sliceFor: FieldSliceData | null = null;

  constructor(private readonly canvas: HTMLCanvasElement) {
    const ctx = canvas.getContext("2d");
    if (!ctx) throw new Error("2d canvas unavailable");
    this.ctx = ctx;
  }

  toWorld(px: number, py: number): { u: number; z: number } {
    const rect = this.canvas.getBoundingClientRect();
    const u = U_MIN + ((px - rect.left) / rect.width) * (U_MAX - U_MIN);
    const z = Z_MAX - ((py - rect.top) / rect.height) * (Z_MAX - Z_MIN);
    return { u, z };
  }

  private sx(u: number): number {
    return ((u - U_MIN) / (U_MAX - U_MIN)) * this.canvas.width;
  }

  private sy(z: number): number {
    return (1 - (z - Z_MIN) / (Z_MAX - Z_MIN)) * this.canvas.height;
  }

  render(inputs: ViewInputs): void {
    const { ctx, canvas } = this;
    ctx.fillStyle = "#10141c";
    ctx.fillRect(0, 0, canvas.width, canvas.height);

    if (inputs.showSlice && inputs.slice) this.drawSlice(inputs.slice);
    this.drawCoils();
    this.drawWorkspace();
    for (const obj of inputs.scene) this.drawObject(obj, inputs.plane);
    this.drawMarker(inputs);
  }

  private drawCoils(): void {
    const { ctx } = this;
    ctx.fillStyle = "rgba(196, 134, 62, 0.55)";
    ctx.strokeStyle = "#c4863e";
    for (const cz of COIL_CENTERS) {
      for (const side of [-1, 1]) {
        const x0 = this.sx(side * COIL_OUTER_R);
        const x1 = this.sx(side * COIL_INNER_R);
        const y0 = this.sy(cz + COIL_LENGTH / 2);
        const y1 = this.sy(cz - COIL_LENGTH / 2);
        ctx.fillRect(Math.min(x0, x1), y0, Math.abs(x1 - x0), y1 - y0);
        ctx.strokeRect(Math.min(x0, x1), y0, Math.abs(x1 - x0), y1 - y0);
      }
    }
  }

  private drawWorkspace(): void {
    const { ctx } = this;
    ctx.strokeStyle = "rgba(120, 170, 255, 0.35)";
    ctx.setLineDash([6, 4]);
    const x0 = this.sx(-WORKSPACE_R);
    const x1 = this.sx(WORKSPACE_R);
    const y0 = this.sy(0.225 + 0.02);
    const y1 = this.sy(-0.02);
    ctx.strokeRect(x0, y0, x1 - x0, y1 - y0);
    ctx.setLineDash([]);
  }

  private drawObject(obj: SceneObjectJson, plane: Plane): void {
    const { ctx } = this;
    const u = plane === "xz" ? obj.center[0] : obj.center[1];
    const z = obj.center[2];
    ctx.strokeStyle = "#6fd3a3";
    ctx.lineWidth = 2;
    if (obj.kind === "sphere") {
      const r = (obj.size as number) / 2;
      ctx.beginPath();
      ctx.ellipse(
        this.sx(u), this.sy(z),
        Math.abs(this.sx(u + r) - this.sx(u)),
        Math.abs(this.sy(z + r) - this.sy(z)),
        0, 0, 2 * Math.PI,
      );
      ctx.stroke();
    } else {
      let halfU: number;
      let halfZ: number;
      if (obj.kind === "cube") {
        halfU = (obj.size as number) / 2;
        halfZ = halfU;
      } else {
        const [diameter, length] = obj.size as [number, number];
        halfU = diameter / 2;
        halfZ = length / 2;
      }
      ctx.strokeRect(
        this.sx(u - halfU),
        this.sy(z + halfZ),
        this.sx(u + halfU) - this.sx(u - halfU),
        this.sy(z - halfZ) - this.sy(z + halfZ),
      );
    }
    ctx.lineWidth = 1;
  }

  private drawMarker(inputs: ViewInputs): void {
    const marker = inputs.marker;
    if (!marker) return;
    const { ctx } = this;
    const u = inputs.plane === "xz" ? marker[0] : marker[1];
    const z = marker[2];
    const contact = inputs.latest?.contact ?? false;
    ctx.beginPath();
    ctx.arc(this.sx(u), this.sy(z), 9, 0, 2 * Math.PI);
    ctx.fillStyle = inputs.stale
      ? "rgba(160, 160, 160, 0.7)"
      : contact
        ? "#ff7854"
        : "#6fb7ff";
    ctx.fill();
    ctx.strokeStyle = "#ffffff";
    ctx.stroke();
  }

  private drawSlice(slice: FieldSliceData): void {
    if (this.sliceFor !== slice) {
      const raster = document.createElement("canvas");
      raster.width = slice.n;
      raster.height = slice.n;
      const rctx = raster.getContext("2d")!;
      const image = rctx.createImageData(slice.n, slice.n);
      const peak = Math.max(...slice.values, 1e-12);
      for (let row = 0; row < slice.n; row++) {
        for (let col = 0; col < slice.n; col++) {
          // Server rows scan z ascending; canvas rows go top-down.
          const value = slice.values[(slice.n - 1 - row) * slice.n + col] / peak;
          const offset = (row * slice.n + col) * 4;
          image.data[offset] = 255 * Math.min(1, value * 1.4);
          image.data[offset + 1] = 255 * Math.pow(value, 2.2);
          image.data[offset + 2] = 90 * (1 - value);
          image.data[offset + 3] = 160;
        }
      }
      rctx.putImageData(image, 0, 0);
      this.sliceCanvas = raster;
      this.sliceFor = slice;
    }
    const [u0, u1, z0, z1] = slice.extent;
    this.ctx.imageSmoothingEnabled = true;
    this.ctx.drawImage(
      this.sliceCanvas!,
      this.sx(u0),
      this.sy(z1),
      this.sx(u1) - this.sx(u0),
      this.sy(z0) - this.sy(z1),
    );
  }
}

/** Clamp a drag point into the reachable workspace box. */
export function clampToWorkspace(u: number, z: number): { u: number; z: number } {
  return {
    u: Math.min(Math.max(u, -WORKSPACE_R), WORKSPACE_R),
    z: Math.min(Math.max(z, -0.02), 0.245),
  };
}
