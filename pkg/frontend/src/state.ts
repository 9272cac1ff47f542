/**
 * Single store for everything the panels render.
 *
 * Network and pointer events are serialized through apply* methods; views
 * read snapshots and never mutate.  The finger marker echoes the last
 * locally commanded position until a state message acknowledges it (the
 * reported finger lands on the command), then follows the server again.
 */

import {
  FieldSliceData,
  Plane,
  SceneObjectJson,
  ServerMessage,
  StateMessage,
} from "./protocol.js";

export const STALE_AFTER_MS = 500;
const ACK_TOLERANCE = 1e-6;
const HISTORY_LIMIT = 600;
const ERROR_LIMIT = 5;

export type Connection = "connecting" | "open" | "closed";

export interface ForcePoint {
  t: number;
  desired: number;
  achieved: number;
}

export class Store {
  connection: Connection = "closed";
  latest: StateMessage | null = null;
  lastStateAtMs: number | null = null;
  scene: SceneObjectJson[] = [];
  slice: FieldSliceData | null = null;
  plane: Plane = "xz";
  history: ForcePoint[] = [];
  errors: string[] = [];
  pendingPosition: [number, number, number] | null = null;

  setConnection(connection: Connection): void {
    this.connection = connection;
    if (connection !== "open") {
      this.pendingPosition = null;
    }
  }

  applyServerMessage(message: ServerMessage, nowMs: number): void {
    switch (message.type) {
      case "state":
        this.latest = message;
        this.lastStateAtMs = nowMs;
        this.history.push({
          t: message.t,
          desired: message.f_desired,
          achieved: message.f_achieved,
        });
        if (this.history.length > HISTORY_LIMIT) {
          this.history.splice(0, this.history.length - HISTORY_LIMIT);
        }
        if (
          this.pendingPosition !== null &&
          message.finger.every(
            (c, i) => Math.abs(c - this.pendingPosition![i]) <= ACK_TOLERANCE,
          )
        ) {
          this.pendingPosition = null; // acknowledged
        }
        break;
      case "scene":
        this.scene = message.objects;
        break;
      case "field_slice_data":
        this.slice = message;
        break;
      case "error":
        this.errors.push(message.msg);
        if (this.errors.length > ERROR_LIMIT) {
          this.errors.splice(0, this.errors.length - ERROR_LIMIT);
        }
        break;
    }
  }

  /** Called when a set_position command is handed to the socket. */
  notePositionSent(p: [number, number, number]): void {
    this.pendingPosition = p;
  }

  /** Marker: the newest of local command and server echo. */
  markerPosition(): [number, number, number] | null {
    if (this.pendingPosition !== null) return this.pendingPosition;
    return this.latest ? this.latest.finger : null;
  }

  /** No state message for STALE_AFTER_MS while connected: flag the data. */
  isStale(nowMs: number): boolean {
    if (this.connection !== "open") return true;
    if (this.lastStateAtMs === null) return true;
    return nowMs - this.lastStateAtMs > STALE_AFTER_MS;
  }
}

/**
 * Latest-wins rate limiter for pointer-drag commands (default 60 Hz): a
 * burst of calls forwards the first immediately, keeps only the newest of
 * the rest, and flushes it when the interval expires.
 */
export class RateLimiter<T> {
  private lastSentMs = -Infinity;
  private queued: T | null = null;
  private timer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    private readonly send: (value: T) => void,
    private readonly minIntervalMs: number = 1000 / 60,
    private readonly clock: () => number = () => performance.now(),
  ) {}

  push(value: T): void {
    const now = this.clock();
    if (now - this.lastSentMs >= this.minIntervalMs) {
      this.lastSentMs = now;
      this.send(value);
      return;
    }
    this.queued = value;
    if (this.timer === null) {
      const wait = this.minIntervalMs - (now - this.lastSentMs);
      this.timer = setTimeout(() => this.flush(), Math.max(wait, 0));
    }
  }

  private flush(): void {
    this.timer = null;
    if (this.queued === null) return;
    this.lastSentMs = this.clock();
    const value = this.queued;
    this.queued = null;
    this.send(value);
  }

  dispose(): void {
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = null;
    this.queued = null;
  }
}
