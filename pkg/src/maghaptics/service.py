"""Live telemetry and command service for the haptic workbench.

One simulation stepper runs the force pipeline in (soft) real time; any
number of clients observe it and steer it over a persistent socket
carrying one JSON message per line.  Two framings of the same protocol
are accepted on a single port: newline-delimited JSON over a raw TCP
connection, and RFC 6455 WebSocket text frames so a browser can connect
without a bridge (the first bytes of the connection select the framing).

Server -> client:
    {"type": "scene", "objects": [...]}            on connect and on change
    {"type": "state", "t", "finger", "f_desired", "f_achieved",
     "duty", "currents", "contact", "infeasible"}  at >= 20 Hz
    {"type": "field_slice_data", "plane", "n", "extent", "values"}
    {"type": "error", "msg"}

Client -> server:
    {"type": "set_position", "p": [x, y, z]}
    {"type": "load_scene", "objects": [...]}
    {"type": "set_params", "stiffness"?, "texture"?, "tau"?}
    {"type": "field_slice", "plane": "xz"|"yz", "n": 64}

Commands mutate the simulation only between force ticks, through one
ordered queue; malformed input earns an error reply, never a dropped
session.
"""

from __future__ import annotations

import base64
import hashlib
import json
import queue
import socket
import struct
import threading
import time

import numpy as np

from .coils import CoilStack, MIDGAP_Z, stack_field
from .forcemap import ForceMapGrid
from .scene import SceneObject, parse_scene, scene_to_json, with_params
from .simloop import ForcePipeline

_WS_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"
_MAX_SLICE_N = 128
_SEND_QUEUE_LIMIT = 256


def default_scene() -> list[SceneObject]:
    """A sphere parked where the stack has comfortable force authority."""
    return [SceneObject(kind="sphere", center=(0.05, 0.0, 0.0625), size=0.100)]


class _Session:
    """One connected client: framing, reader thread, outbound queue."""

    def __init__(self, service: "HapticService", sock: socket.socket, addr):
        self.service = service
        self.sock = sock
        self.addr = addr
        self.websocket = False
        self.alive = True
        self.outbox: queue.Queue[bytes | None] = queue.Queue(_SEND_QUEUE_LIMIT)
        self._recv_buffer = b""
        self.reader = threading.Thread(target=self._read_loop, daemon=True)
        self.writer = threading.Thread(target=self._write_loop, daemon=True)

    def start(self):
        self.reader.start()
        self.writer.start()

    # -- outbound ---------------------------------------------------------

    def send_json(self, message: dict):
        data = (json.dumps(message) + "\n").encode()
        if self.websocket:
            data = _ws_text_frame(data)
        try:
            self.outbox.put_nowait(data)
        except queue.Full:
            # Slow consumer: shed the oldest frame rather than stall the rig.
            try:
                self.outbox.get_nowait()
                self.outbox.put_nowait(data)
            except (queue.Empty, queue.Full):
                pass

    def _write_loop(self):
        while self.alive:
            data = self.outbox.get()
            if data is None:
                break
            try:
                self.sock.sendall(data)
            except OSError:
                self.close()
                break

    # -- inbound ----------------------------------------------------------

    def _recv_exact(self, n: int) -> bytes:
        while len(self._recv_buffer) < n:
            chunk = self.sock.recv(4096)
            if not chunk:
                raise ConnectionError("peer closed")
            self._recv_buffer += chunk
        out, self._recv_buffer = self._recv_buffer[:n], self._recv_buffer[n:]
        return out

    def _recv_line(self) -> bytes:
        while b"\n" not in self._recv_buffer:
            chunk = self.sock.recv(4096)
            if not chunk:
                raise ConnectionError("peer closed")
            self._recv_buffer += chunk
        line, self._recv_buffer = self._recv_buffer.split(b"\n", 1)
        return line

    def _read_loop(self):
        try:
            # Sniff the framing: websocket clients open with an HTTP upgrade
            # immediately; a quiet connection is a raw JSON-lines observer.
            try:
                self.sock.settimeout(0.25)
                first = self.sock.recv(4096, socket.MSG_PEEK)
            except TimeoutError:
                first = b""
            finally:
                self.sock.settimeout(None)
            if first.startswith(b"GET "):
                self._websocket_handshake()
                self.websocket = True
                self.service._on_session_ready(self)
                self._ws_read_loop()
            else:
                self.service._on_session_ready(self)
                while self.alive:
                    line = self._recv_line().strip()
                    if line:
                        self.service._handle_message(self, line)
        except (ConnectionError, OSError):
            pass
        finally:
            self.close()

    def _websocket_handshake(self):
        request = b""
        while b"\r\n\r\n" not in request:
            chunk = self.sock.recv(4096)
            if not chunk:
                raise ConnectionError("peer closed during handshake")
            request += chunk
        key = None
        for line in request.split(b"\r\n"):
            if line.lower().startswith(b"sec-websocket-key:"):
                key = line.split(b":", 1)[1].strip().decode()
        if key is None:
            raise ConnectionError("not a websocket upgrade request")
        accept = base64.b64encode(
            hashlib.sha1((key + _WS_GUID).encode()).digest()
        ).decode()
        self.sock.sendall(
            (
                "HTTP/1.1 101 Switching Protocols\r\n"
                "Upgrade: websocket\r\n"
                "Connection: Upgrade\r\n"
                f"Sec-WebSocket-Accept: {accept}\r\n\r\n"
            ).encode()
        )

    def _ws_read_loop(self):
        fragments = b""
        while self.alive:
            head = self._recv_exact(2)
            fin = head[0] & 0x80
            opcode = head[0] & 0x0F
            masked = head[1] & 0x80
            length = head[1] & 0x7F
            if length == 126:
                (length,) = struct.unpack(">H", self._recv_exact(2))
            elif length == 127:
                (length,) = struct.unpack(">Q", self._recv_exact(8))
            mask = self._recv_exact(4) if masked else b""
            payload = self._recv_exact(length)
            if mask:
                payload = bytes(b ^ mask[i % 4] for i, b in enumerate(payload))
            if opcode == 0x8:  # close
                try:
                    self.sock.sendall(_ws_frame(0x8, b""))
                except OSError:
                    pass
                break
            if opcode == 0x9:  # ping
                self.outbox.put(_ws_frame(0xA, payload))
                continue
            if opcode in (0x1, 0x2, 0x0):
                fragments += payload
                if fin:
                    message = fragments.strip()
                    fragments = b""
                    if message:
                        self.service._handle_message(self, message)

    def close(self):
        if not self.alive:
            return
        self.alive = False
        try:
            self.outbox.put_nowait(None)
        except queue.Full:
            pass
        try:
            self.sock.close()
        except OSError:
            pass
        self.service._drop_session(self)


def _ws_frame(opcode: int, payload: bytes) -> bytes:
    head = bytes([0x80 | opcode])
    n = len(payload)
    if n < 126:
        head += bytes([n])
    elif n <= 0xFFFF:
        head += bytes([126]) + struct.pack(">H", n)
    else:
        head += bytes([127]) + struct.pack(">Q", n)
    return head + payload


def _ws_text_frame(data: bytes) -> bytes:
    return _ws_frame(0x1, data)


class HapticService:
    """Simulation stepper plus broadcaster behind a TCP/WebSocket port."""

    def __init__(
        self,
        fmap: ForceMapGrid,
        stack: CoilStack,
        scene=None,
        *,
        host: str = "127.0.0.1",
        port: int = 0,
        force_rate: float = 500.0,
        telemetry_rate: float = 30.0,
    ):
        self.fmap = fmap
        self.stack = stack
        self.host = host
        self.force_rate = force_rate
        self.telemetry_rate = telemetry_rate
        self.pipeline = ForcePipeline(
            scene if scene is not None else default_scene(), fmap, stack
        )
        self.position = (0.0, 0.0, MIDGAP_Z)
        self.sim_time = 0.0
        self.commands: queue.Queue = queue.Queue()
        self.sessions: list[_Session] = []
        self._sessions_lock = threading.Lock()
        self._stop = threading.Event()
        self._latest_state: dict | None = None
        self._listener = socket.create_server((host, port))
        self.port = self._listener.getsockname()[1]
        self._threads: list[threading.Thread] = []

    # -- lifecycle --------------------------------------------------------

    def start(self):
        self._threads = [
            threading.Thread(target=self._accept_loop, daemon=True),
            threading.Thread(target=self._step_loop, daemon=True),
        ]
        for t in self._threads:
            t.start()

    def stop(self):
        self._stop.set()
        try:
            self._listener.close()
        except OSError:
            pass
        with self._sessions_lock:
            sessions = list(self.sessions)
        for session in sessions:
            session.close()
        for t in self._threads:
            t.join(timeout=2.0)

    def join(self):
        while not self._stop.wait(0.2):
            pass

    # -- sessions ---------------------------------------------------------

    def _accept_loop(self):
        while not self._stop.is_set():
            try:
                sock, addr = self._listener.accept()
            except OSError:
                return
            sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
            session = _Session(self, sock, addr)
            session.start()

    def _on_session_ready(self, session: _Session):
        with self._sessions_lock:
            self.sessions.append(session)
        session.send_json({"type": "scene", "objects": scene_to_json(self.pipeline.scene)})
        if self._latest_state is not None:
            session.send_json(self._latest_state)

    def _drop_session(self, session: _Session):
        with self._sessions_lock:
            if session in self.sessions:
                self.sessions.remove(session)

    def _broadcast(self, message: dict):
        with self._sessions_lock:
            sessions = list(self.sessions)
        for session in sessions:
            session.send_json(message)

    # -- inbound commands ---------------------------------------------------

    def _handle_message(self, session: _Session, raw: bytes):
        try:
            message = json.loads(raw.decode())
            if not isinstance(message, dict) or "type" not in message:
                raise ValueError("message must be an object with a 'type'")
        except (ValueError, UnicodeDecodeError) as exc:
            session.send_json({"type": "error", "msg": f"bad message: {exc}"})
            return
        kind = message["type"]
        if kind == "field_slice":
            # Pure query on the latest snapshot; answered from this thread.
            try:
                session.send_json(self._field_slice(message))
            except ValueError as exc:
                session.send_json({"type": "error", "msg": str(exc)})
            return
        if kind in ("set_position", "load_scene", "set_params"):
            self.commands.put((session, message))
            return
        session.send_json({"type": "error", "msg": f"unknown message type {kind!r}"})

    def _field_slice(self, message: dict) -> dict:
        plane = message.get("plane", "xz")
        if plane not in ("xz", "yz"):
            raise ValueError("plane must be 'xz' or 'yz'")
        n = int(message.get("n", 64))
        if not 4 <= n <= _MAX_SLICE_N:
            raise ValueError(f"n must be in [4, {_MAX_SLICE_N}]")
        state = self._latest_state
        currents = state["currents"] if state else [0.0] * 6
        u = np.linspace(-0.105, 0.105, n)
        z = np.linspace(self.stack.z_min, self.stack.z_max, n)
        u_grid, z_grid = np.meshgrid(u, z)  # row-major over z rows
        sample = stack_field(
            self.stack, currents, np.abs(u_grid), z_grid, exploratory=True
        )
        magnitude = np.asarray(sample.magnitude)
        return {
            "type": "field_slice_data",
            "plane": plane,
            "n": n,
            "extent": [-0.105, 0.105, float(self.stack.z_min), float(self.stack.z_max)],
            "values": [float(v) for v in magnitude.ravel()],
        }

    def _apply_command(self, session: _Session, message: dict):
        kind = message["type"]
        try:
            if kind == "set_position":
                p = message["p"]
                if len(p) != 3:
                    raise ValueError("p must be [x, y, z]")
                x, y, z = (float(c) for c in p)
                if not self.stack.in_workspace(float(np.hypot(x, y)), z):
                    raise ValueError("position outside the workspace")
                self.position = (x, y, z)
            elif kind == "load_scene":
                self.pipeline.scene = parse_scene(message["objects"])
                self._broadcast(
                    {"type": "scene", "objects": scene_to_json(self.pipeline.scene)}
                )
            elif kind == "set_params":
                if "tau" in message:
                    self.pipeline.set_time_constant(float(message["tau"]))
                stiffness = message.get("stiffness")
                texture = message.get("texture")
                if stiffness is not None or texture is not None:
                    self.pipeline.scene = [
                        with_params(obj, stiffness=stiffness, texture=texture)
                        for obj in self.pipeline.scene
                    ]
                    self._broadcast(
                        {"type": "scene", "objects": scene_to_json(self.pipeline.scene)}
                    )
        except (KeyError, TypeError, ValueError) as exc:
            session.send_json({"type": "error", "msg": f"{kind}: {exc}"})

    # -- stepper ------------------------------------------------------------

    def _step_loop(self):
        dt = 1.0 / self.force_rate
        telemetry_interval = 1.0 / self.telemetry_rate
        start = time.monotonic()
        done_ticks = 0
        last_sent = 0.0
        record = None
        while not self._stop.is_set():
            while True:
                try:
                    session, message = self.commands.get_nowait()
                except queue.Empty:
                    break
                self._apply_command(session, message)

            target = int((time.monotonic() - start) / dt)
            burst = min(target - done_ticks, int(self.force_rate // 4) + 1)
            for _ in range(burst):
                self.sim_time = done_ticks * dt
                record = self.pipeline.tick(self.sim_time, self.position, dt)
                done_ticks += 1

            now = time.monotonic()
            if record is not None and now - last_sent >= telemetry_interval:
                last_sent = now
                state = {
                    "type": "state",
                    "t": record.t,
                    "finger": list(record.finger),
                    "f_desired": record.f_desired,
                    "f_achieved": record.f_achieved,
                    "duty": [float(d) for d in record.duties],
                    "currents": [float(c) for c in record.currents_actual],
                    "contact": record.in_contact,
                    "infeasible": record.infeasible,
                }
                self._latest_state = state
                self._broadcast(state)
            time.sleep(dt / 2)
