"""Private data store: the only in-system source of private values.

A key-value store persisted as an append-only event file (``pdb.jsonl``);
state is a fold of the events. Keys are public and may appear anywhere;
values are private and must never leave through logs, prompts, or error
messages — callers get them only as tainted values.
"""

from __future__ import annotations

import json
import os
import re
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Protocol

from .taint import PdbKey, TaintedValue

_KEY_RE = re.compile(r"^[a-z0-9_]+$")

FILE_NAME = "pdb.jsonl"


class PdbError(Exception):
    pass


class InvalidKey(PdbError):
    def __init__(self, key: str):
        super().__init__(f"invalid private-data key: {key!r}")
        self.key = key


class KeyNotFound(PdbError):
    def __init__(self, key: str):
        super().__init__(f"no private data stored under key {key!r}")
        self.key = key


@dataclass(frozen=True)
class PrivateRecord:
    key: str
    value: str
    origin: str  # "user_entered" | "user_confirmed_isa"
    created_at: float


class InformationSeeker(Protocol):
    """Optional search helper for values missing from the store."""

    def find(self, key: str) -> Optional[str]: ...


class StubInformationSeeker:
    """Default seeker: never finds anything."""

    def find(self, key: str) -> Optional[str]:
        return None


class PrivateDataDB:
    """Event-sourced store; single serialized writer, concurrent readers."""

    def __init__(self, path: Optional[str | Path] = None,
                 now: Callable[[], float] = time.time):
        self.path = Path(path) if path is not None else None
        self._now = now
        self._lock = threading.Lock()
        self._records: dict[str, PrivateRecord] = {}
        self._replay()

    # ------------------------------------------------------------------
    # Reads

    def get(self, key: str) -> TaintedValue:
        """The value behind ``key``, tainted exactly with that key."""
        record = self._records.get(key)
        if record is None:
            raise KeyNotFound(key)
        return TaintedValue(record.value, frozenset({PdbKey(key)}))

    def has(self, key: str) -> bool:
        return key in self._records

    def list_keys(self) -> list[str]:
        return sorted(self._records)

    def record(self, key: str) -> PrivateRecord:
        record = self._records.get(key)
        if record is None:
            raise KeyNotFound(key)
        return record

    # ------------------------------------------------------------------
    # Writes

    def upsert_external(self, key: str, value: str, origin: str = "user_entered") -> None:
        self._validate_key(key)
        if not isinstance(value, str):
            raise PdbError("private values are stored as text")
        with self._lock:
            record = PrivateRecord(key, value, origin, self._now())
            self._append({"op": "upsert", "key": key, "value": value,
                          "origin": origin, "ts": record.created_at})
            self._records[key] = record

    def delete(self, key: str) -> None:
        with self._lock:
            if key not in self._records:
                raise KeyNotFound(key)
            self._append({"op": "delete", "key": key, "ts": self._now()})
            del self._records[key]

    # ------------------------------------------------------------------
    # Redaction support

    def all_values(self) -> list[str]:
        """Current private values; for leak checks only, never for output."""
        return [r.value for r in self._records.values()]

    # ------------------------------------------------------------------

    def _validate_key(self, key: str) -> None:
        if not isinstance(key, str) or not _KEY_RE.match(key):
            raise InvalidKey(key if isinstance(key, str) else repr(key))

    def _replay(self) -> None:
        if self.path is None or not self.path.exists():
            return
        with self.path.open(encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                event = json.loads(line)
                if event["op"] == "upsert":
                    self._records[event["key"]] = PrivateRecord(
                        event["key"], event["value"], event.get("origin", "user_entered"),
                        event.get("ts", 0.0),
                    )
                elif event["op"] == "delete":
                    self._records.pop(event["key"], None)

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
