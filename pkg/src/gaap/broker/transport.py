"""Transports carrying wire frames to tool servers.

Three kinds: an in-process loopback (frames still round-trip through the
NDJSON codec), a stdio subprocess, and a TCP socket. One request is in
flight per connection at a time.
"""

from __future__ import annotations

import socket
import subprocess
from typing import Protocol

from .mocks import MockServer
from .wire import ProtocolError, decode_frame, encode_request


class TransportError(Exception):
    pass


class Transport(Protocol):
    def request(self, req_id: int, method: str, params: dict) -> dict: ...

    def close(self) -> None: ...


class InProcessTransport:
    def __init__(self, server: MockServer):
        self.server = server

    def request(self, req_id: int, method: str, params: dict) -> dict:
        line = encode_request(req_id, method, params)
        return decode_frame(self.server.handle_line(line))

    def close(self) -> None:
        pass


class StdioTransport:
    def __init__(self, command: str, argv: list[str]):
        try:
            self.proc = subprocess.Popen(
                [command, *argv],
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                bufsize=1,
            )
        except OSError as exc:
            raise TransportError(f"failed to start {command}: {exc}") from exc

    def request(self, req_id: int, method: str, params: dict) -> dict:
        if self.proc.poll() is not None:
            raise TransportError("tool server process exited")
        assert self.proc.stdin and self.proc.stdout
        try:
            self.proc.stdin.write(encode_request(req_id, method, params))
            self.proc.stdin.flush()
            line = self.proc.stdout.readline()
        except (BrokenPipeError, OSError) as exc:
            raise TransportError(f"tool server pipe failed: {exc}") from exc
        if not line:
            raise ProtocolError("tool server closed the stream")
        return decode_frame(line)

    def close(self) -> None:
        if self.proc.poll() is None:
            self.proc.terminate()
            try:
                self.proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self.proc.kill()


class TcpTransport:
    def __init__(self, host: str, port: int):
        try:
            self.sock = socket.create_connection((host, port), timeout=10)
        except OSError as exc:
            raise TransportError(f"failed to connect to {host}:{port}: {exc}") from exc
        self.reader = self.sock.makefile("r", encoding="utf-8")
        self.writer = self.sock.makefile("w", encoding="utf-8")

    def request(self, req_id: int, method: str, params: dict) -> dict:
        try:
            self.writer.write(encode_request(req_id, method, params))
            self.writer.flush()
            line = self.reader.readline()
        except OSError as exc:
            raise TransportError(f"tool server socket failed: {exc}") from exc
        if not line:
            raise ProtocolError("tool server closed the connection")
        return decode_frame(line)

    def close(self) -> None:
        try:
            self.sock.close()
        except OSError:
            pass
