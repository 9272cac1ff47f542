/**
 * WebSocket session with automatic reconnect.
 *
 * Sends never block or throw: a command while disconnected is dropped (the
 * stream of fresh state makes retrying stale commands pointless).  On drop
 * the client retries with exponential backoff until stop() is called.
 */

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export interface SessionCallbacks {
  onLine(line: string): void;
  onStatus(status: "connecting" | "open" | "closed"): void;
}

const BACKOFF_START_MS = 500;
const BACKOFF_MAX_MS = 5000;

export class Session {
  private socket: SocketLike | null = null;
  private stopped = false;
  private backoffMs = BACKOFF_START_MS;
  private retryTimer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    private readonly url: string,
    private readonly callbacks: SessionCallbacks,
    private readonly factory: SocketFactory = (url) =>
      new WebSocket(url) as unknown as SocketLike,
  ) {}

  start(): void {
    this.stopped = false;
    this.open();
  }

  private open(): void {
    this.callbacks.onStatus("connecting");
    let socket: SocketLike;
    try {
      socket = this.factory(this.url);
    } catch {
      this.scheduleRetry();
      return;
    }
    this.socket = socket;
    socket.onopen = () => {
      this.backoffMs = BACKOFF_START_MS;
      this.callbacks.onStatus("open");
    };
    socket.onmessage = (event) => {
      if (typeof event.data === "string") {
        for (const line of event.data.split("\n")) {
          if (line.trim().length > 0) this.callbacks.onLine(line);
        }
      }
    };
    socket.onerror = () => {
      /* onclose follows; nothing to do */
    };
    socket.onclose = () => {
      this.socket = null;
      this.callbacks.onStatus("closed");
      this.scheduleRetry();
    };
  }

  private scheduleRetry(): void {
    if (this.stopped || this.retryTimer !== null) return;
    this.retryTimer = setTimeout(() => {
      this.retryTimer = null;
      if (!this.stopped) this.open();
    }, this.backoffMs);
    this.backoffMs = Math.min(this.backoffMs * 1.7, BACKOFF_MAX_MS);
  }

  /** Returns true if the command was actually handed to an open socket. */
  send(message: object): boolean {
    if (this.socket === null) return false;
    try {
      this.socket.send(JSON.stringify(message) + "\n");
      return true;
    } catch {
      return false;
    }
  }

  stop(): void {
    this.stopped = true;
    if (this.retryTimer !== null) {
      clearTimeout(this.retryTimer);
      this.retryTimer = null;
    }
    if (this.socket !== null) {
      try {
        this.socket.close();
      } catch {
        /* already closing */
      }
      this.socket = null;
    }
    this.callbacks.onStatus("closed");
  }
}
