/**
 * Workbench composition: one store, one socket session, one render loop.
 */

import {
  Plane,
  Texture,
  fieldSlice,
  loadScene,
  parseServerMessage,
  scenePreset,
  setParams,
  setPosition,
} from "./protocol.js";
import { RateLimiter, Store } from "./state.js";
import { Session } from "./net.js";
import { CrossSectionView, clampToWorkspace } from "./view.js";
import { drawDutyBars, drawForceStrip } from "./charts.js";

function element<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

const store = new Store();
let session: Session | null = null;

const canvas = element<HTMLCanvasElement>("cross-section");
const view = new CrossSectionView(canvas);
const dutyCanvas = element<HTMLCanvasElement>("duty-bars");
const stripCanvas = element<HTMLCanvasElement>("force-strip");
const banner = element<HTMLDivElement>("banner");
const readout = element<HTMLDivElement>("readout");
const urlInput = element<HTMLInputElement>("server-url");
const sliceToggle = element<HTMLInputElement>("slice-toggle");

function sendCommand(message: object): void {
  session?.send(message);
}

const dragLimiter = new RateLimiter<[number, number, number]>((p) => {
  if (session?.send(setPosition(p))) store.notePositionSent(p);
});

// ------------------------------------------------------------- connection

element<HTMLButtonElement>("connect").addEventListener("click", () => {
  session?.stop();
  session = new Session(urlInput.value, {
    onLine: (line) => {
      const message = parseServerMessage(line);
      if (message) store.applyServerMessage(message, performance.now());
    },
    onStatus: (status) => store.setConnection(status),
  });
  session.start();
});

// ------------------------------------------------------------- dragging

let dragging = false;

function dragTo(event: PointerEvent): void {
  const world = view.toWorld(event.clientX, event.clientY);
  const { u, z } = clampToWorkspace(world.u, world.z);
  const p: [number, number, number] =
    store.plane === "xz" ? [u, 0, z] : [0, u, z];
  dragLimiter.push(p);
}

canvas.addEventListener("pointerdown", (event) => {
  dragging = true;
  canvas.setPointerCapture(event.pointerId);
  dragTo(event);
});
canvas.addEventListener("pointermove", (event) => {
  if (dragging) dragTo(event);
});
canvas.addEventListener("pointerup", (event) => {
  dragging = false;
  canvas.releasePointerCapture(event.pointerId);
});

// ------------------------------------------------------------- panels

element<HTMLSelectElement>("plane").addEventListener("change", (event) => {
  store.plane = (event.target as HTMLSelectElement).value as Plane;
});

function currentTexture(): Texture {
  return element<HTMLSelectElement>("texture").value as Texture;
}

function currentStiffness(): number {
  return Number(element<HTMLInputElement>("stiffness").value);
}

element<HTMLSelectElement>("scene-preset").addEventListener("change", (event) => {
  const kind = (event.target as HTMLSelectElement).value;
  if (kind === "sphere" || kind === "cube" || kind === "cylinder") {
    sendCommand(loadScene(scenePreset(kind, currentTexture(), currentStiffness())));
  }
});

element<HTMLSelectElement>("texture").addEventListener("change", () => {
  sendCommand(setParams({ texture: currentTexture() }));
});

const stiffness = element<HTMLInputElement>("stiffness");
stiffness.addEventListener("change", () => {
  element<HTMLSpanElement>("stiffness-value").textContent = stiffness.value;
  sendCommand(setParams({ stiffness: currentStiffness() }));
});

const tau = element<HTMLInputElement>("tau");
tau.addEventListener("change", () => {
  element<HTMLSpanElement>("tau-value").textContent = tau.value;
  sendCommand(setParams({ tau: Number(tau.value) / 1000 }));
});

element<HTMLButtonElement>("slice-refresh").addEventListener("click", () => {
  sendCommand(fieldSlice(store.plane, 64));
});

// ------------------------------------------------------------- rendering

function renderBanner(now: number): void {
  const stale = store.isStale(now);
  if (store.connection === "open" && !stale) {
    banner.textContent = "live";
    banner.className = "banner live";
  } else if (store.connection === "open") {
    banner.textContent = "stale: no state for 500 ms";
    banner.className = "banner stale";
  } else {
    banner.textContent =
      store.connection === "connecting" ? "connecting..." : "disconnected";
    banner.className = "banner down";
  }
}

function renderReadout(): void {
  const latest = store.latest;
  if (!latest) {
    readout.textContent = "no telemetry yet";
    return;
  }
  const flags = [
    latest.contact ? "contact" : "free",
    latest.infeasible ? "saturated" : "",
  ]
    .filter(Boolean)
    .join(", ");
  readout.textContent =
    `t=${latest.t.toFixed(2)} s  ` +
    `desired ${latest.f_desired.toFixed(3)} N  ` +
    `achieved ${latest.f_achieved.toFixed(3)} N  [${flags}]` +
    (store.errors.length ? `  last error: ${store.errors.at(-1)}` : "");
}

function frame(): void {
  const now = performance.now();
  view.render({
    plane: store.plane,
    scene: store.scene,
    latest: store.latest,
    marker: store.markerPosition(),
    slice: store.slice,
    showSlice: sliceToggle.checked,
    stale: store.isStale(now),
  });
  drawDutyBars(dutyCanvas, store.latest ? store.latest.duty : null);
  drawForceStrip(stripCanvas, store.history);
  renderBanner(now);
  renderReadout();
  requestAnimationFrame(frame);
}

requestAnimationFrame(frame);
