"""Disclosure log: append-only record of every authorized disclosure.

One record per (item, call) pair, written ahead of the tool emission. The
log is the source of transitive taint expansion: data returned by an entity
may contain anything previously disclosed to it through a passthrough-
eligible argument. Argument values are stored as digests, not raw bytes —
the log must not become a second copy of private data.
"""

from __future__ import annotations

import json
import os
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Optional

from .taint import ItemDescriptor, item_from_wire, item_to_wire

FILE_NAME = "disclosures.jsonl"

# Disclosures to the model provider are logged for audit but excluded from
# expansion: model outputs re-enter only as new artifacts, covered by the
# session taints.
MODEL_PROVIDER_ENTITY = "model-provider"


class DisclosureLogError(Exception):
    pass


@dataclass(frozen=True)
class DisclosureRecord:
    seq: int
    item: ItemDescriptor
    entity: str
    server: str
    tool: str
    arg_names: tuple[str, ...]  # causal arguments for this item
    arg_value_digests: tuple[str, ...]
    ts: float
    session_id: str

    def as_wire(self) -> dict:
        return {
            "seq": self.seq,
            "item": item_to_wire(self.item),
            "entity": self.entity,
            "server": self.server,
            "tool": self.tool,
            "arg_names": list(self.arg_names),
            "arg_value_digests": list(self.arg_value_digests),
            "ts": self.ts,
            "session_id": self.session_id,
        }


def record_from_wire(data: dict) -> DisclosureRecord:
    return DisclosureRecord(
        data["seq"],
        item_from_wire(data["item"]),
        data["entity"],
        data["server"],
        data["tool"],
        tuple(data.get("arg_names", ())),
        tuple(data.get("arg_value_digests", ())),
        data.get("ts", 0.0),
        data.get("session_id", ""),
    )


class DisclosureLog:
    """Single serialized appender establishing the global seq order."""

    def __init__(self, path: Optional[str | Path] = None,
                 now: Callable[[], float] = time.time):
        self.path = Path(path) if path is not None else None
        self._now = now
        self._lock = threading.Lock()
        self._records: list[DisclosureRecord] = []
        self._replay()

    # ------------------------------------------------------------------

    @property
    def head(self) -> int:
        """Current log length; equals the last assigned seq."""
        return len(self._records)

    def append(
        self,
        item: ItemDescriptor,
        entity: str,
        server: str,
        tool: str,
        arg_names: Iterable[str],
        arg_value_digests: Iterable[str],
        session_id: str,
    ) -> int:
        """Durably append one disclosure; returns the assigned seq.

        The write is flushed and fsynced before returning so the record is
        on disk before the tool call is emitted (fail-closed on storage
        errors: the caller must not emit if this raises).
        """
        with self._lock:
            seq = len(self._records) + 1
            record = DisclosureRecord(
                seq, item, entity, server, tool,
                tuple(arg_names), tuple(arg_value_digests),
                self._now(), session_id,
            )
            try:
                self._append_line(record.as_wire())
            except OSError as exc:
                raise DisclosureLogError(f"disclosure log write failed: {exc}") from exc
            self._records.append(record)
            return seq

    def items_disclosed_to(
        self,
        entity: str,
        up_to_seq: int,
        passthrough_filter: Callable[[str, str, str], bool],
    ) -> set[ItemDescriptor]:
        """Items the entity has seen (and may return), bounded in time.

        A record counts when any of its causal arguments is passthrough-
        eligible; records with no causal argument (control-flow-only
        disclosures) conservatively count as well.
        """
        if entity == MODEL_PROVIDER_ENTITY:
            return set()
        found: set[ItemDescriptor] = set()
        for record in self._records:
            if record.seq > up_to_seq:
                break
            if record.entity != entity:
                continue
            if not record.arg_names or any(
                passthrough_filter(record.server, record.tool, arg)
                for arg in record.arg_names
            ):
                found.add(record.item)
        return found

    def export(
        self,
        start_seq: int = 1,
        end_seq: Optional[int] = None,
        entity: Optional[str] = None,
    ) -> list[DisclosureRecord]:
        records = [r for r in self._records if r.seq >= start_seq]
        if end_seq is not None:
            records = [r for r in records if r.seq <= end_seq]
        if entity is not None:
            records = [r for r in records if r.entity == entity]
        return records

    # ------------------------------------------------------------------

    def _replay(self) -> None:
        if self.path is None or not self.path.exists():
            return
        with self.path.open(encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                self._records.append(record_from_wire(json.loads(line)))
        for index, record in enumerate(self._records, start=1):
            if record.seq != index:
                raise DisclosureLogError(
                    f"disclosure log corrupt: seq {record.seq} at position {index}"
                )

    def _append_line(self, event: dict) -> None:
        if self.path is None:
            return
        created = not self.path.exists()
        with self.path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(event, ensure_ascii=False) + "\n")
            fh.flush()
            os.fsync(fh.fileno())
        if created:
            os.chmod(self.path, 0o600)
