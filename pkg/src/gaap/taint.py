"""Taint labels, tainted runtime values, and public item descriptors.

A taint label names where a value came from: a private-data key, an external
source (one tool-call output), or the model session. A tainted value pairs a
runtime value with a set of labels. Item descriptors are the *public* names
of private items used in permission prompts, permission records, and the
disclosure log; they never contain private values.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union


# ---------------------------------------------------------------------------
# Labels


@dataclass(frozen=True)
class PdbKey:
    """Provenance: value of one private-data-store key."""

    key: str


@dataclass(frozen=True)
class ExtSource:
    """Provenance: the output of one external tool call.

    ``seq`` is the disclosure-log length observed when the originating call
    returned; transitive expansion uses records with seq <= this bound.
    """

    entity: str
    server: str
    tool: str
    seq: int
    selector: str = ""


@dataclass(frozen=True)
class ModelSession:
    """Provenance: derived from the model session (multi-shot artifacts)."""


TaintLabel = Union[PdbKey, ExtSource, ModelSession]

MODEL_SESSION = ModelSession()

EMPTY_TAINTS: frozenset[TaintLabel] = frozenset()


# ---------------------------------------------------------------------------
# Values

PlainValue = Union[str, int, float, bool, None, list, dict]


@dataclass(frozen=True)
class TaintedValue:
    """A runtime value with its taint set.

    Container values hold TaintedValue elements; the container's own taints
    are in addition to element taints. ``deep_taints`` flattens both.
    """

    value: object
    taints: frozenset[TaintLabel] = EMPTY_TAINTS

    def with_taints(self, extra: frozenset[TaintLabel]) -> "TaintedValue":
        if not extra:
            return self
        return TaintedValue(self.value, self.taints | extra)

    def deep_taints(self) -> frozenset[TaintLabel]:
        taints = self.taints
        if isinstance(self.value, list):
            for item in self.value:
                taints |= item.deep_taints()
        elif isinstance(self.value, dict):
            for item in self.value.values():
                taints |= item.deep_taints()
        return taints

    def plain(self) -> PlainValue:
        """Strip taints recursively, yielding a JSON-compatible value."""
        if isinstance(self.value, list):
            return [item.plain() for item in self.value]
        if isinstance(self.value, dict):
            return {key: item.plain() for key, item in self.value.items()}
        return self.value

    def type_name(self) -> str:
        return plain_type_name(self.value)


def untainted(value: object) -> TaintedValue:
    return TaintedValue(value, EMPTY_TAINTS)


def from_plain(value: PlainValue, taints: frozenset[TaintLabel] = EMPTY_TAINTS) -> TaintedValue:
    """Wrap a decoded plain value; ``taints`` become the container's own."""
    if isinstance(value, list):
        return TaintedValue([from_plain(v) for v in value], taints)
    if isinstance(value, dict):
        return TaintedValue({k: from_plain(v) for k, v in value.items()}, taints)
    return TaintedValue(value, taints)


def plain_type_name(value: object) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "bool"
    if isinstance(value, int):
        return "int"
    if isinstance(value, float):
        return "float"
    if isinstance(value, str):
        return "string"
    if isinstance(value, list):
        return "list"
    if isinstance(value, dict):
        return "map"
    return type(value).__name__


# ---------------------------------------------------------------------------
# Item descriptors


@dataclass(frozen=True)
class PdbItem:
    key: str

    def render(self) -> str:
        return f"pdb:{self.key}"


@dataclass(frozen=True)
class ExtItem:
    """Descriptor of data sourced from an external entity via one tool.

    ``selector`` carries the public identity argument (e.g. ``path=x.txt``)
    when the entity was resolved from an argument; it is already public by
    the annotation's attestation.
    """

    entity: str
    server: str
    tool: str
    selector: str = ""

    def render(self) -> str:
        base = f"{self.server}.{self.tool}"
        return f"{base} {self.selector}" if self.selector else base


ItemDescriptor = Union[PdbItem, ExtItem]


def item_from_label(label: TaintLabel) -> ItemDescriptor:
    """The public descriptor for a single provenance label."""
    if isinstance(label, PdbKey):
        return PdbItem(label.key)
    if isinstance(label, ExtSource):
        return ExtItem(label.entity, label.server, label.tool, label.selector)
    raise ValueError("the model-session label expands per item, not directly")


def render_item(item: ItemDescriptor) -> str:
    return item.render()


def item_to_wire(item: ItemDescriptor) -> dict:
    if isinstance(item, PdbItem):
        return {"kind": "pdb", "key": item.key}
    return {
        "kind": "ext",
        "entity": item.entity,
        "server": item.server,
        "tool": item.tool,
        "selector": item.selector,
    }


def item_from_wire(data: dict) -> ItemDescriptor:
    if data["kind"] == "pdb":
        return PdbItem(data["key"])
    return ExtItem(
        data["entity"], data["server"], data["tool"], data.get("selector", "")
    )
