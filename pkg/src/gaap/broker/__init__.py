"""Tool broker: wire protocol, transports, server connections, mock servers."""

from .client import (
    AuthorizationMismatch,
    Broker,
    BrokerError,
    Connection,
    SchemaViolation,
    ServerConfig,
    ToolError,
    UnknownServer,
    load_servers_config,
)
from .mocks import SERVER_TYPES, MockServer, ToolDescriptor, make_server
from .transport import InProcessTransport, StdioTransport, TcpTransport, TransportError
from .wire import ProtocolError

__all__ = [
    "AuthorizationMismatch",
    "Broker",
    "BrokerError",
    "Connection",
    "InProcessTransport",
    "MockServer",
    "ProtocolError",
    "SERVER_TYPES",
    "SchemaViolation",
    "ServerConfig",
    "StdioTransport",
    "TcpTransport",
    "ToolDescriptor",
    "ToolError",
    "TransportError",
    "UnknownServer",
    "load_servers_config",
    "make_server",
]
