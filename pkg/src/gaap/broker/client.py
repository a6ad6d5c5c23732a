"""Broker: connects to configured tool servers and executes authorized calls.

The broker refuses to transmit anything the gate did not authorize: each
call carries the gate's Authorized record and the canonical digest of the
wire arguments must equal the authorized digest. Argument schemas from the
server's tool listing are validated before emission. No retries: a failed
or malformed exchange surfaces as an error and the request is not resent.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from ..canon import digest
from ..gate import Authorized
from .mocks import ToolDescriptor, descriptor_from_wire, make_server
from .transport import InProcessTransport, StdioTransport, TcpTransport, Transport
from .wire import ProtocolError


class BrokerError(Exception):
    pass


class UnknownServer(BrokerError):
    pass


class ToolError(BrokerError):
    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code


class SchemaViolation(BrokerError):
    pass


class AuthorizationMismatch(BrokerError):
    pass


@dataclass(frozen=True)
class ServerConfig:
    name: str
    transport: dict
    annotation_file: Optional[str] = None


def load_servers_config(path: str | Path) -> dict[str, ServerConfig]:
    path = Path(path)
    raw = json.loads(path.read_text(encoding="utf-8"))
    servers = raw.get("servers") if isinstance(raw, dict) else raw
    if not isinstance(servers, list):
        raise BrokerError("servers config must be a list or {'servers': [...]}")
    base = path.parent.resolve()
    configs: dict[str, ServerConfig] = {}
    for entry in servers:
        name = entry.get("name")
        transport = entry.get("transport")
        if not isinstance(name, str) or not isinstance(transport, dict):
            raise BrokerError("each server needs a name and a transport object")
        if name in configs:
            raise BrokerError(f"duplicate server name {name!r}")
        transport = dict(transport)
        # Relative sandbox paths resolve against the config file, not the cwd.
        if transport.get("kind") == "inproc" and transport.get("sandbox"):
            transport["sandbox"] = str((base / transport["sandbox"]).resolve())
        configs[name] = ServerConfig(name, transport, entry.get("annotation_file"))
    return configs


def _open_transport(config: ServerConfig, sandbox_dir: Optional[Path]) -> Transport:
    spec = config.transport
    kind = spec.get("kind")
    if kind == "stdio":
        return StdioTransport(spec["command"], list(spec.get("argv", ())))
    if kind == "tcp":
        return TcpTransport(spec["host"], int(spec["port"]))
    if kind == "inproc":
        sandbox = spec.get("sandbox") or (sandbox_dir and str(sandbox_dir))
        if not sandbox:
            raise BrokerError(f"inproc server {config.name!r} needs a sandbox dir")
        return InProcessTransport(make_server(spec.get("server", config.name), sandbox))
    raise BrokerError(f"unknown transport kind {kind!r} for server {config.name!r}")


class Connection:
    """One server connection; request ids are unique per connection."""

    def __init__(self, name: str, transport: Transport):
        self.name = name
        self.transport = transport
        self._ids = itertools.count(1)
        self.tools: dict[str, ToolDescriptor] = {}
        self._list_tools()

    def _roundtrip(self, method: str, params: dict) -> dict:
        req_id = next(self._ids)
        frame = self.transport.request(req_id, method, params)
        if frame.get("id") != req_id:
            raise ProtocolError(
                f"response id {frame.get('id')!r} does not match request {req_id}"
            )
        if "error" in frame:
            error = frame["error"] or {}
            raise ToolError(str(error.get("code", "error")), str(error.get("message", "")))
        if "result" not in frame:
            raise ProtocolError("response has neither result nor error")
        return frame["result"]

    def _list_tools(self) -> None:
        result = self._roundtrip("list_tools", {})
        tools = result.get("tools")
        if not isinstance(tools, list):
            raise ProtocolError("list_tools result malformed")
        self.tools = {t["name"]: descriptor_from_wire(t) for t in tools}

    def call(self, tool: str, args: dict, authorization: Authorized):
        if digest(args) != authorization.args_digest:
            raise AuthorizationMismatch(
                "refusing to transmit: arguments differ from the authorized call"
            )
        self._validate_args(tool, args)
        result = self._roundtrip("call_tool", {"tool": tool, "args": args})
        if not isinstance(result, dict) or "value" not in result:
            raise ProtocolError("call_tool result malformed")
        return result["value"]

    def _validate_args(self, tool: str, args: dict) -> None:
        descriptor = self.tools.get(tool)
        if descriptor is None:
            raise SchemaViolation(f"server {self.name!r} has no tool {tool!r}")
        for arg_name in args:
            if arg_name not in descriptor.args:
                raise SchemaViolation(
                    f"{self.name}.{tool} does not accept argument {arg_name!r}"
                )
        for arg_name, spec in descriptor.args.items():
            if spec.get("required") and arg_name not in args:
                raise SchemaViolation(
                    f"{self.name}.{tool} requires argument {arg_name!r}"
                )
            if arg_name in args:
                self._check_kind(tool, arg_name, spec.get("kind", "scalar"), args[arg_name])

    def _check_kind(self, tool: str, arg_name: str, kind: str, value) -> None:
        ok = (
            isinstance(value, list)
            if kind == "list"
            else isinstance(value, dict)
            if kind == "map"
            else not isinstance(value, (list, dict))
        )
        if not ok:
            raise SchemaViolation(
                f"{self.name}.{tool} argument {arg_name!r} must be a {kind}"
            )

    def close(self) -> None:
        self.transport.close()


class Broker:
    def __init__(
        self,
        configs: dict[str, ServerConfig],
        sandbox_dir: Optional[str | Path] = None,
    ):
        self.configs = configs
        self.sandbox_dir = Path(sandbox_dir) if sandbox_dir else None
        self._connections: dict[str, Connection] = {}

    def connect(self, name: str) -> Connection:
        if name in self._connections:
            return self._connections[name]
        config = self.configs.get(name)
        if config is None:
            raise UnknownServer(f"no server named {name!r} in the session config")
        transport = _open_transport(config, self.sandbox_dir)
        connection = Connection(name, transport)
        self._connections[name] = connection
        return connection

    def close(self) -> None:
        for connection in self._connections.values():
            connection.close()
        self._connections.clear()
