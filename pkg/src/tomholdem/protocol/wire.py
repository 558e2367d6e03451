"""Length-prefixed JSON over TCP.

Each message is a 4-byte big-endian length followed by that many bytes of
UTF-8 JSON.  Requests::

    {"tool": "get_state" | "submit_action", "agent": str, "payload": {...}}

``submit_action`` payloads are ``{"hand_id": int, "kind": str, "amount": int}``.
Every request gets exactly one response::

    {"ok": bool, "state": StateView | null, "error": {"code", "detail"} | null}
"""

from __future__ import annotations

import json
import socket
import socketserver
import struct
import threading
from dataclasses import dataclass

from .session import GameSession, SessionConfig
from .views import ActionRequest, ErrorCode, ProtocolError

MAX_FRAME = 1 << 20
TOOLS = ("get_state", "submit_action")


class PortUnavailable(OSError):
    pass


def encode_frame(obj) -> bytes:
    body = json.dumps(obj, separators=(",", ":")).encode("utf-8")
    return struct.pack(">I", len(body)) + body


def _recv_exact(sock: socket.socket, n: int) -> bytes | None:
    buf = bytearray()
    while len(buf) < n:
        chunk = sock.recv(n - len(buf))
        if not chunk:
            return None
        buf.extend(chunk)
    return bytes(buf)


def read_frame(sock: socket.socket) -> bytes | None:
    """Raw body of the next frame, or None on a clean close."""
    header = _recv_exact(sock, 4)
    if header is None:
        return None
    (length,) = struct.unpack(">I", header)
    if length > MAX_FRAME:
        raise ValueError(f"frame of {length} bytes exceeds limit")
    return _recv_exact(sock, length)


def handle_request(session: GameSession, raw: bytes | str | dict) -> dict:
    """Decode one request, run it against ``session``, and build the response."""
    try:
        if isinstance(raw, (bytes, str)):
            try:
                msg = json.loads(raw)
            except (ValueError, UnicodeDecodeError):
                raise ProtocolError(ErrorCode.MalformedRequest, "body is not valid JSON") from None
        else:
            msg = raw
        if not isinstance(msg, dict):
            raise ProtocolError(ErrorCode.MalformedRequest, "request must be a JSON object")
        tool, agent = msg.get("tool"), msg.get("agent")
        if tool not in TOOLS:
            raise ProtocolError(ErrorCode.MalformedRequest, f"unknown tool {tool!r}")
        if not isinstance(agent, str):
            raise ProtocolError(ErrorCode.MalformedRequest, "agent must be a string")
        if tool == "get_state":
            view = session.get_state(agent)
        else:
            session.check_agent(agent)
            view = session.submit_action(agent, ActionRequest.from_dict(msg.get("payload")))
        return {"ok": True, "state": view.to_dict(), "error": None}
    except ProtocolError as err:
        return {"ok": False, "state": None, "error": err.to_dict()}


class _Handler(socketserver.BaseRequestHandler):
    def handle(self):
        session: GameSession = self.server.session  # type: ignore[attr-defined]
        while True:
            try:
                body = read_frame(self.request)
            except (ValueError, OSError):
                return
            if body is None:
                return
            try:
                self.request.sendall(encode_frame(handle_request(session, body)))
            except OSError:
                return


class _Server(socketserver.ThreadingTCPServer):
    daemon_threads = True
    allow_reuse_address = True


@dataclass
class ServiceHandle:
    session: GameSession
    server: _Server
    thread: threading.Thread
    watcher: threading.Thread
    stopped: threading.Event

    @property
    def port(self) -> int:
        return self.server.server_address[1]

    @property
    def host(self) -> str:
        return self.server.server_address[0]

    def close(self) -> None:
        if not self.stopped.is_set():
            self.stopped.set()
            self.server.shutdown()
        self.server.server_close()

    def wait(self, timeout: float | None = None) -> bool:
        """Block until the session ends (or ``timeout``); True if it ended."""
        return self.stopped.wait(timeout)

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def serve(config: SessionConfig, *, shutdown_on_end: bool = True, tick_interval: float = 0.05) -> ServiceHandle:
    """Start a session and listen for agents on ``config.host:config.port``."""
    session = GameSession(config)
    try:
        server = _Server((config.host, config.port), _Handler)
    except OSError as exc:
        raise PortUnavailable(f"cannot bind {config.host}:{config.port}: {exc}") from exc
    server.session = session  # type: ignore[attr-defined]
    session.start()
    stopped = threading.Event()
    thread = threading.Thread(target=server.serve_forever, name="holdem-serve", daemon=True)
    thread.start()

    def watch():
        while not stopped.wait(tick_interval):
            session.tick()
            if shutdown_on_end and session.over:
                stopped.set()
                server.shutdown()
                return

    watcher = threading.Thread(target=watch, name="holdem-timeouts", daemon=True)
    watcher.start()
    return ServiceHandle(session, server, thread, watcher, stopped)


class ProtocolClient:
    """Blocking client for one agent connection."""

    def __init__(self, host: str = "127.0.0.1", port: int = 3000, timeout: float = 10.0):
        self.sock = socket.create_connection((host, port), timeout=timeout)

    def call(self, request: dict) -> dict:
        self.sock.sendall(encode_frame(request))
        body = read_frame(self.sock)
        if body is None:
            raise ConnectionError("server closed the connection")
        return json.loads(body)

    def get_state(self, agent: str) -> dict:
        return self.call({"tool": "get_state", "agent": agent, "payload": {}})

    def submit_action(self, agent: str, hand_id: int, kind: str, amount: int = 0) -> dict:
        payload = {"hand_id": hand_id, "kind": kind, "amount": amount}
        return self.call({"tool": "submit_action", "agent": agent, "payload": payload})

    def close(self) -> None:
        self.sock.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
