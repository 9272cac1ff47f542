/**
 * Duty-bar chart (six coils, saturation highlighted) and the scrolling
 * desired-vs-achieved force strip that makes the coil lag visible.
 */

import { ForcePoint } from "./state.js";

const SATURATION = 0.999;

export function drawDutyBars(
  canvas: HTMLCanvasElement,
  duties: number[] | null,
): void {
  const ctx = canvas.getContext("2d")!;
  const { width, height } = canvas;
  ctx.fillStyle = "#10141c";
  ctx.fillRect(0, 0, width, height);
  const mid = height / 2;
  ctx.strokeStyle = "#3a4458";
  ctx.beginPath();
  ctx.moveTo(0, mid);
  ctx.lineTo(width, mid);
  ctx.stroke();

  const slot = width / 6;
  for (let i = 0; i < 6; i++) {
    const duty = duties ? duties[i] : 0;
    const x = i * slot + slot * 0.18;
    const barWidth = slot * 0.64;
    const barHeight = -duty * (height / 2 - 12);
    const saturated = Math.abs(duty) >= SATURATION;
    ctx.fillStyle = saturated ? "#ff5470" : "#6fb7ff";
    ctx.fillRect(x, mid, barWidth, barHeight);
    ctx.fillStyle = "#93a1b8";
    ctx.font = "11px sans-serif";
    ctx.textAlign = "center";
    ctx.fillText(`${i + 1}`, x + barWidth / 2, height - 2);
    if (saturated) {
      ctx.fillStyle = "#ff5470";
      ctx.fillText("sat", x + barWidth / 2, 11);
    }
  }
}

export function drawForceStrip(
  canvas: HTMLCanvasElement,
  history: ForcePoint[],
): void {
  const ctx = canvas.getContext("2d")!;
  const { width, height } = canvas;
  ctx.fillStyle = "#10141c";
  ctx.fillRect(0, 0, width, height);
  if (history.length < 2) return;

  let peak = 0.5;
  for (const point of history) {
    peak = Math.max(peak, Math.abs(point.desired), Math.abs(point.achieved));
  }
  const t0 = history[0].t;
  const t1 = history[history.length - 1].t;
  const span = Math.max(t1 - t0, 1e-9);
  const toX = (t: number) => ((t - t0) / span) * width;
  const toY = (f: number) => height / 2 - (f / peak) * (height / 2 - 8);

  ctx.strokeStyle = "#3a4458";
  ctx.beginPath();
  ctx.moveTo(0, toY(0));
  ctx.lineTo(width, toY(0));
  ctx.stroke();

  const trace = (pick: (p: ForcePoint) => number, colour: string) => {
    ctx.strokeStyle = colour;
    ctx.beginPath();
    history.forEach((point, i) => {
      const x = toX(point.t);
      const y = toY(pick(point));
      if (i === 0) ctx.moveTo(x, y);
      else ctx.lineTo(x, y);
    });
    ctx.stroke();
  };
  trace((p) => p.desired, "#93a1b8");
  trace((p) => p.achieved, "#6fd3a3");

  ctx.font = "11px sans-serif";
  ctx.textAlign = "left";
  ctx.fillStyle = "#93a1b8";
  ctx.fillText("desired", 6, 14);
  ctx.fillStyle = "#6fd3a3";
  ctx.fillText("achieved", 6, 28);
  ctx.fillStyle = "#5b6880";
  ctx.textAlign = "right";
  ctx.fillText(`±${peak.toFixed(2)} N`, width - 6, 14);
}
