"""Session transcript: ordered event record consumed by the CLI and API.

Events are line-delimited records {seq, kind, payload, ts} with kind one of
call | decision | log | shot. The transcript is user-side state; sinks fan
events out to live subscribers (console event stream, files).
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional


@dataclass(frozen=True)
class TranscriptEvent:
    seq: int
    kind: str  # "call" | "decision" | "log" | "shot"
    payload: dict
    ts: float

    def as_wire(self) -> dict:
        return {"seq": self.seq, "kind": self.kind, "payload": self.payload, "ts": self.ts}


class Transcript:
    def __init__(self, now: Callable[[], float] = time.time):
        self._now = now
        self.events: list[TranscriptEvent] = []
        self._sinks: list[Callable[[TranscriptEvent], None]] = []

    def add_sink(self, sink: Callable[[TranscriptEvent], None]) -> None:
        self._sinks.append(sink)

    def append(self, kind: str, payload: dict) -> TranscriptEvent:
        event = TranscriptEvent(len(self.events) + 1, kind, payload, self._now())
        self.events.append(event)
        for sink in self._sinks:
            sink(event)
        return event

    def calls(self) -> list[TranscriptEvent]:
        return [e for e in self.events if e.kind == "call"]

    def decisions(self) -> list[TranscriptEvent]:
        return [e for e in self.events if e.kind == "decision"]

    def write_jsonl(self, path: str | Path) -> None:
        with Path(path).open("w", encoding="utf-8") as fh:
            for event in self.events:
                fh.write(json.dumps(event.as_wire(), ensure_ascii=False) + "\n")
