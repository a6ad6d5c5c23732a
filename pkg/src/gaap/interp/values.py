"""Runtime-only value kinds and text rendering for the interpreter."""

from __future__ import annotations

import json
from dataclasses import dataclass

from ..taint import TaintedValue, plain_type_name


@dataclass(frozen=True)
class PdbHandle:
    """The ``priv_data_db`` builtin binding."""


@dataclass(frozen=True)
class McpHelper:
    """The ``mcp_helper`` builtin binding."""


@dataclass(frozen=True)
class BuiltinFn:
    name: str  # "qllm" | "multishot" | "log"


@dataclass(frozen=True)
class ServerHandle:
    server: str


@dataclass(frozen=True)
class LlmHandle:
    """Pseudo-server handle for the model extension tools."""


@dataclass(frozen=True)
class BoundMethod:
    owner: TaintedValue
    name: str


_HANDLE_TYPES = (PdbHandle, McpHelper, BuiltinFn, ServerHandle, LlmHandle, BoundMethod)


def is_handle(value: object) -> bool:
    return isinstance(value, _HANDLE_TYPES)


def value_type_name(value: object) -> str:
    if isinstance(value, ServerHandle):
        return "server handle"
    if isinstance(value, (PdbHandle, McpHelper, LlmHandle)):
        return "builtin handle"
    if isinstance(value, (BuiltinFn, BoundMethod)):
        return "builtin function"
    return plain_type_name(value)


def to_text(tainted: TaintedValue) -> str:
    """Deterministic text form used by interpolation and log output."""
    value = tainted.value
    if isinstance(value, str):
        return value
    if value is None:
        return "None"
    if isinstance(value, bool):
        return "True" if value else "False"
    if isinstance(value, (int, float)):
        return repr(value)
    if isinstance(value, (list, dict)):
        return json.dumps(tainted.plain(), ensure_ascii=False)
    if isinstance(value, ServerHandle):
        return f"<server {value.server}>"
    if is_handle(value):
        return f"<{value_type_name(value)}>"
    return repr(value)
