"""Permission store: (private item, external entity) -> allow/deny.

Persisted decisions are an append-only event file (``permissions.jsonl``);
state is a pure fold with last-writer-wins per pair. "Just once" allowances
are never written here — they exist only in the disclosure log.
A fresh store answers Unknown for every pair: there are no defaults.
"""

from __future__ import annotations

import enum
import json
import os
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

from .taint import ItemDescriptor, item_from_wire, item_to_wire, render_item

FILE_NAME = "permissions.jsonl"


class Decision(enum.Enum):
    ALLOW = "allow"
    DENY = "deny"
    UNKNOWN = "unknown"


class PermissionError_(Exception):
    pass


class NotFound(PermissionError_):
    pass


@dataclass(frozen=True)
class PermissionRecord:
    item: ItemDescriptor
    entity: str
    decision: Decision
    persisted: bool
    decided_at: float


def _pair_key(item: ItemDescriptor, entity: str) -> tuple[str, str]:
    return (render_item(item), entity)


class PermissionDB:
    def __init__(self, path: Optional[str | Path] = None,
                 now: Callable[[], float] = time.time):
        self.path = Path(path) if path is not None else None
        self._now = now
        self._lock = threading.Lock()
        self._records: dict[tuple[str, str], PermissionRecord] = {}
        self._replay()

    # ------------------------------------------------------------------

    def check(self, item: ItemDescriptor, entity: str) -> Decision:
        record = self._records.get(_pair_key(item, entity))
        return record.decision if record else Decision.UNKNOWN

    def record(
        self,
        item: ItemDescriptor,
        entity: str,
        decision: Decision,
        persisted: bool = True,
    ) -> None:
        if decision is Decision.UNKNOWN:
            raise PermissionError_("cannot record an unknown decision")
        if not persisted:
            return  # just-once: never stored
        with self._lock:
            now = self._now()
            self._append({
                "op": "set",
                "item": item_to_wire(item),
                "entity": entity,
                "decision": decision.value,
                "ts": now,
            })
            self._records[_pair_key(item, entity)] = PermissionRecord(
                item, entity, decision, True, now
            )

    def revoke(self, item: ItemDescriptor, entity: str) -> None:
        with self._lock:
            key = _pair_key(item, entity)
            if key not in self._records:
                raise NotFound(f"no permission recorded for {key[0]} -> {entity}")
            self._append({
                "op": "revoke",
                "item": item_to_wire(item),
                "entity": entity,
                "ts": self._now(),
            })
            del self._records[key]

    def list(
        self,
        entity: Optional[str] = None,
        item: Optional[str] = None,
    ) -> list[PermissionRecord]:
        records = sorted(self._records.values(), key=lambda r: r.decided_at)
        if entity is not None:
            records = [r for r in records if r.entity == entity]
        if item is not None:
            records = [r for r in records if render_item(r.item) == item]
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
                event = json.loads(line)
                item = item_from_wire(event["item"])
                key = _pair_key(item, event["entity"])
                if event["op"] == "set":
                    self._records[key] = PermissionRecord(
                        item, event["entity"], Decision(event["decision"]),
                        True, event.get("ts", 0.0),
                    )
                elif event["op"] == "revoke":
                    self._records.pop(key, None)

    def _append(self, event: dict) -> None:
        if self.path is None:
            return
        created = not self.path.exists()
        with self.path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(event, ensure_ascii=False) + "\n")
            fh.flush()
            os.fsync(fh.fileno())
        if created:
            os.chmod(self.path, 0o600)
