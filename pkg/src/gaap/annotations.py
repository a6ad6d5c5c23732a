"""Trusted per-server annotations: entity resolution and passthrough flags.

One JSON file per server:

    {
      "server": "email",
      "entity_rule": {
        "kind": "arg_selector",
        "selectors": {"send_email": "args.to"},
        "transform": "lowercase_trim",
        "identity_is_public": true
      },
      "tools": {
        "place": {"passthrough": {"password": false}, "output_public": false}
      }
    }

``entity_rule.kind`` is ``server_name`` (default), ``tool_name``, or
``arg_selector``. Selectors name one argument path per tool; tools without
a selector fall back to the server name. Everything fails closed: schema
violations refuse to load, and an unresolvable entity blocks the call.
Absent annotation files mean worst-case defaults — entity is the server
name, every argument passes through, no output is public.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

ARG_PATH_PREFIX = "args."


class AnnotationError(Exception):
    pass


class SchemaError(AnnotationError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.field_path = path


class EntityUnresolvable(AnnotationError):
    def __init__(self, server: str, tool: str, reason: str):
        super().__init__(f"cannot resolve entity for {server}.{tool}: {reason}")
        self.server = server
        self.tool = tool


@dataclass(frozen=True)
class EntityRule:
    kind: str  # "server_name" | "tool_name" | "arg_selector"
    selectors: dict[str, str] = field(default_factory=dict)  # tool -> arg path
    transform: str = "none"  # "none" | "lowercase_trim"


@dataclass(frozen=True)
class ToolAnnotation:
    passthrough: dict[str, bool] = field(default_factory=dict)
    output_public: bool = False


@dataclass(frozen=True)
class ServerAnnotation:
    server: str
    entity_rule: EntityRule = EntityRule("server_name")
    tools: dict[str, ToolAnnotation] = field(default_factory=dict)


DEFAULT_ANNOTATION = ServerAnnotation(server="")


@dataclass(frozen=True)
class ResolvedEntity:
    entity: str
    selector: str = ""  # "arg=value" when resolved from an argument


class AnnotationRegistry:
    """Immutable after load; safe to share."""

    def __init__(self, annotations: dict[str, ServerAnnotation]):
        self._annotations = dict(annotations)

    def annotation_for(self, server: str) -> ServerAnnotation:
        return self._annotations.get(server, DEFAULT_ANNOTATION)

    def with_overrides(self, extra: dict[str, ServerAnnotation]) -> "AnnotationRegistry":
        merged = dict(self._annotations)
        merged.update(extra)
        return AnnotationRegistry(merged)

    def resolve_entity(self, server: str, tool: str, args: dict) -> ResolvedEntity:
        """Deterministic entity for a pending call; fails closed."""
        rule = self.annotation_for(server).entity_rule
        if rule.kind == "tool_name":
            return ResolvedEntity(f"{server}.{tool}")
        if rule.kind == "arg_selector":
            path = rule.selectors.get(tool)
            if path is None:
                return ResolvedEntity(server)
            value = _lookup_arg_path(args, path)
            if not isinstance(value, str) or not value:
                raise EntityUnresolvable(
                    server, tool,
                    f"selector {path!r} missing or not a non-empty string",
                )
            if rule.transform == "lowercase_trim":
                value = value.strip().lower()
            arg_name = path[len(ARG_PATH_PREFIX):]
            return ResolvedEntity(value, selector=f"{arg_name}={value}")
        return ResolvedEntity(server)

    def passthrough_eligible(self, server: str, tool: str, arg_name: str) -> bool:
        tools = self.annotation_for(server).tools
        annotation = tools.get(tool)
        if annotation is None:
            return True
        return annotation.passthrough.get(arg_name, True)

    def output_public(self, server: str, tool: str) -> bool:
        annotation = self.annotation_for(server).tools.get(tool)
        return annotation.output_public if annotation else False


def _lookup_arg_path(args: dict, path: str) -> Optional[object]:
    if not path.startswith(ARG_PATH_PREFIX):
        return None
    current: object = args
    for part in path[len(ARG_PATH_PREFIX):].split("."):
        if not isinstance(current, dict) or part not in current:
            return None
        current = current[part]
    return current


# ---------------------------------------------------------------------------
# Loading


def load_registry(directory: Optional[str | Path]) -> AnnotationRegistry:
    """Load every ``*.json`` annotation file in a directory (may be absent)."""
    annotations: dict[str, ServerAnnotation] = {}
    if directory is not None:
        root = Path(directory)
        if root.exists():
            for file in sorted(root.glob("*.json")):
                annotation = load_annotation_file(file)
                annotations[annotation.server] = annotation
    return AnnotationRegistry(annotations)


def load_annotation_file(path: str | Path) -> ServerAnnotation:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(str(path), f"not valid JSON: {exc}") from exc
    return parse_annotation(raw, source=str(path))


def parse_annotation(raw: dict, source: str = "<annotation>") -> ServerAnnotation:
    if not isinstance(raw, dict):
        raise SchemaError(source, "annotation must be a JSON object")
    server = raw.get("server")
    if not isinstance(server, str) or not server:
        raise SchemaError(f"{source}:server", "required non-empty string")
    _check_known_fields(raw, {"server", "entity_rule", "tools"}, source)

    rule = _parse_entity_rule(raw.get("entity_rule"), f"{source}:entity_rule")
    tools = _parse_tools(raw.get("tools"), f"{source}:tools")
    return ServerAnnotation(server=server, entity_rule=rule, tools=tools)


def _parse_entity_rule(raw, path: str) -> EntityRule:
    if raw is None:
        return EntityRule("server_name")
    if not isinstance(raw, dict):
        raise SchemaError(path, "must be an object")
    kind = raw.get("kind")
    if kind not in ("server_name", "tool_name", "arg_selector"):
        raise SchemaError(f"{path}.kind", "must be server_name, tool_name, or arg_selector")
    if kind != "arg_selector":
        _check_known_fields(raw, {"kind"}, path)
        return EntityRule(kind)

    _check_known_fields(
        raw, {"kind", "selectors", "transform", "identity_is_public"}, path
    )
    # Selector values become entity names shown in prompts; the author must
    # attest the selected argument is a public identity.
    if raw.get("identity_is_public") is not True:
        raise SchemaError(
            f"{path}.identity_is_public",
            "arg_selector rules require the identity_is_public: true attestation",
        )
    selectors = raw.get("selectors")
    if not isinstance(selectors, dict) or not selectors:
        raise SchemaError(f"{path}.selectors", "must be a non-empty object of tool -> arg path")
    for tool, arg_path in selectors.items():
        if not isinstance(arg_path, str) or not arg_path.startswith(ARG_PATH_PREFIX):
            raise SchemaError(
                f"{path}.selectors.{tool}", f"arg path must start with {ARG_PATH_PREFIX!r}"
            )
        if not arg_path[len(ARG_PATH_PREFIX):]:
            raise SchemaError(f"{path}.selectors.{tool}", "arg path names no argument")
    transform = raw.get("transform", "none")
    if transform not in ("none", "lowercase_trim"):
        raise SchemaError(f"{path}.transform", "must be none or lowercase_trim")
    return EntityRule("arg_selector", dict(selectors), transform)


def _parse_tools(raw, path: str) -> dict[str, ToolAnnotation]:
    if raw is None:
        return {}
    if not isinstance(raw, dict):
        raise SchemaError(path, "must be an object")
    tools: dict[str, ToolAnnotation] = {}
    for tool, spec in raw.items():
        tool_path = f"{path}.{tool}"
        if not isinstance(spec, dict):
            raise SchemaError(tool_path, "must be an object")
        _check_known_fields(spec, {"passthrough", "output_public"}, tool_path)
        passthrough = spec.get("passthrough", {})
        if not isinstance(passthrough, dict):
            raise SchemaError(f"{tool_path}.passthrough", "must be an object")
        for arg, flag in passthrough.items():
            if not isinstance(flag, bool):
                raise SchemaError(f"{tool_path}.passthrough.{arg}", "must be a boolean")
        output_public = spec.get("output_public", False)
        if not isinstance(output_public, bool):
            raise SchemaError(f"{tool_path}.output_public", "must be a boolean")
        tools[tool] = ToolAnnotation(dict(passthrough), output_public)
    return tools


def _check_known_fields(raw: dict, known: set[str], path: str) -> None:
    for key in raw:
        if key not in known:
            raise SchemaError(f"{path}.{key}", "unknown field")
