/**
 * End-to-end against the real backend: spawns the simulator's serve
 * command, speaks the raw JSON-lines framing through the same protocol
 * and store modules the browser uses, and checks the workbench-visible
 * behaviours: contact force on drag-in, duty-bar structure as the force
 * grows, and the stale flag on disconnect.
 */

import { execFileSync, spawn, ChildProcess } from "node:child_process";
import { mkdtempSync } from "node:fs";
import net from "node:net";
import os from "node:os";
import path from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { loadScene, parseServerMessage, scenePreset, setParams, setPosition } from "../src/protocol.js";
import { Store } from "../src/state.js";

const REPO_ROOT = path.resolve(__dirname, "..", "..");
const SPHERE_TOP_Z = 0.1125; // default scene: sphere at (0.05, 0, 0.0625)

let server: ChildProcess;
let port: number;

class LineConnection {
  private buffer = "";
  readonly store = new Store();
  private waiters: Array<() => void> = [];

  constructor(readonly socket: net.Socket) {
    socket.setNoDelay(true);
    socket.on("data", (chunk) => {
      this.buffer += chunk.toString("utf-8");
      let index;
      while ((index = this.buffer.indexOf("\n")) >= 0) {
        const line = this.buffer.slice(0, index);
        this.buffer = this.buffer.slice(index + 1);
        const message = parseServerMessage(line);
        if (message) this.store.applyServerMessage(message, Date.now());
        for (const waiter of this.waiters.splice(0)) waiter();
      }
    });
    socket.on("close", () => this.store.setConnection("closed"));
    this.store.setConnection("open");
  }

  send(message: object): void {
    this.socket.write(JSON.stringify(message) + "\n");
  }

  sendPosition(p: [number, number, number]): void {
    this.send(setPosition(p));
    this.store.notePositionSent(p);
  }

  /** Wait until the predicate holds on the store, or time out. */
  async until(predicate: (store: Store) => boolean, timeoutMs = 5000): Promise<void> {
    const deadline = Date.now() + timeoutMs;
    while (!predicate(this.store)) {
      if (Date.now() > deadline) throw new Error("condition not reached in time");
      await new Promise<void>((resolve) => {
        const timer = setTimeout(resolve, 25);
        this.waiters.push(() => {
          clearTimeout(timer);
          resolve();
        });
      });
    }
  }

  close(): void {
    this.socket.destroy();
  }
}

async function connect(): Promise<LineConnection> {
  const socket = net.createConnection({ host: "127.0.0.1", port });
  await new Promise<void>((resolve, reject) => {
    socket.once("connect", () => resolve());
    socket.once("error", reject);
  });
  return new LineConnection(socket);
}

beforeAll(async () => {
  const tmp = mkdtempSync(path.join(os.tmpdir(), "maghaptics-e2e-"));
  const mapPath = path.join(tmp, "coil.fmap");
  execFileSync("python3", ["-m", "maghaptics", "build-map", "--out", mapPath], {
    cwd: REPO_ROOT,
  });
  server = spawn(
    "python3",
    ["-m", "maghaptics", "serve", "--port", "0", "--map", mapPath],
    { cwd: REPO_ROOT, stdio: ["ignore", "pipe", "pipe"] },
  );
  port = await new Promise<number>((resolve, reject) => {
    let out = "";
    const timer = setTimeout(() => reject(new Error(`serve did not start: ${out}`)), 15000);
    server.stdout!.on("data", (chunk) => {
      out += chunk.toString();
      const match = out.match(/serving on [\d.]+:(\d+)/);
      if (match) {
        clearTimeout(timer);
        resolve(Number(match[1]));
      }
    });
    server.on("exit", () => reject(new Error(`serve exited early: ${out}`)));
  });
}, 30000);

afterAll(() => {
  server?.kill();
});

describe("workbench against the live simulator", () => {
  it("streams scene and state fast enough to animate at 20 Hz", async () => {
    const conn = await connect();
    try {
      await conn.until((s) => s.scene.length > 0);
      expect(conn.store.scene[0].kind).toBe("sphere");

      const before = conn.store.history.length;
      await new Promise((resolve) => setTimeout(resolve, 1000));
      const received = conn.store.history.length - before;
      expect(received).toBeGreaterThanOrEqual(20);
      const times = conn.store.history.map((h) => h.t);
      for (let i = 1; i < times.length; i++) {
        expect(times[i]).toBeGreaterThan(times[i - 1]);
      }
      // Simulation time advanced by at least the 20 Hz floor's worth.
      expect(times.at(-1)! - times[0]).toBeGreaterThanOrEqual((received - 1) / 40);
      expect(conn.store.isStale(Date.now())).toBe(false);
    } finally {
      conn.close();
    }
  }, 15000);

  it("shows contact and ~1.5 N within one state period of dragging into the sphere", async () => {
    const conn = await connect();
    try {
      await conn.until((s) => s.latest !== null);
      conn.sendPosition([0.05, 0, SPHERE_TOP_Z - 0.005]);
      const sentAt = Date.now();
      await conn.until(
        (s) =>
          (s.latest?.contact ?? false) &&
          Math.abs((s.latest?.f_desired ?? 0) - 1.5) < 1e-9,
      );
      // One state period at the 20 Hz telemetry floor is 50 ms; allow the
      // command+tick latency on top.
      expect(Date.now() - sentAt).toBeLessThanOrEqual(150);
      expect(conn.store.latest!.infeasible).toBe(false);
      // Marker follows the server once it echoes the commanded position.
      expect(conn.store.pendingPosition).toBeNull();
      expect(conn.store.markerPosition()).toEqual([0.05, 0, SPHERE_TOP_Z - 0.005]);
    } finally {
      conn.sendPosition([0.0, 0.0, 0.18]);
      conn.close();
    }
  }, 15000);

  it("grows a saturated duty prefix as the demanded force grows", async () => {
    const conn = await connect();
    const engagedCoils = () =>
      conn.store.latest!.duty.filter((d) => d !== 0).length;
    const saturatedCoils = () =>
      conn.store.latest!.duty.filter((d) => Math.abs(d) >= 0.999).length;
    try {
      await conn.until((s) => s.latest !== null);

      // Soft spring: 30 N/m * 5 mm = 0.15 N, inside the nearest coil's
      // 0.215 N authority at this pose, so exactly one coil engages.
      conn.send(setParams({ stiffness: 30 }));
      conn.sendPosition([0.05, 0, SPHERE_TOP_Z - 0.005]);
      await conn.until(
        (s) => Math.abs((s.latest?.f_desired ?? 0) - 0.15) < 1e-9 && s.latest!.contact,
      );
      expect(engagedCoils()).toBe(1);

      // Default spring: 1.5 N recruits several coils, prefix saturated.
      conn.send(setParams({ stiffness: 300 }));
      await conn.until((s) => Math.abs((s.latest?.f_desired ?? 0) - 1.5) < 1e-9);
      expect(engagedCoils()).toBeGreaterThan(1);
      expect(engagedCoils() - saturatedCoils()).toBeLessThanOrEqual(1);
      expect(conn.store.latest!.infeasible).toBe(false);

      // Stiff spring: 3 N exceeds capacity here; everything saturates.
      conn.send(setParams({ stiffness: 600 }));
      await conn.until(
        (s) => Math.abs((s.latest?.f_desired ?? 0) - 3.0) < 1e-9 && s.latest!.infeasible,
      );
      expect(saturatedCoils()).toBe(6);
    } finally {
      conn.send(setParams({ stiffness: 300 }));
      conn.sendPosition([0.0, 0.0, 0.18]);
      conn.close();
    }
  }, 20000);

  it("supports scene swaps and rejects junk without dropping the session", async () => {
    const conn = await connect();
    try {
      await conn.until((s) => s.scene.length > 0);
      conn.send(loadScene(scenePreset("cube", "L2_wood", 300)));
      await conn.until((s) => s.scene[0]?.kind === "cube");
      expect(conn.store.scene[0].texture).toBe("L2_wood");

      conn.socket.write("garbage\n");
      await conn.until((s) => s.errors.length > 0);
      const before = conn.store.history.length;
      await conn.until((s) => s.history.length > before); // stream survives
    } finally {
      conn.send(loadScene(scenePreset("sphere", "none", 300)));
      conn.close();
    }
  }, 15000);

  it("flags the view stale when the server goes away", async () => {
    const conn = await connect();
    try {
      await conn.until((s) => s.latest !== null);
      expect(conn.store.isStale(Date.now())).toBe(false);
      server.kill();
      await new Promise((resolve) => setTimeout(resolve, 700));
      expect(conn.store.isStale(Date.now())).toBe(true);
    } finally {
      conn.close();
    }
  }, 15000);
});
