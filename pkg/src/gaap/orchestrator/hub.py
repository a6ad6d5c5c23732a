"""Console hub: pending user prompts and the live event stream.

The hub is the bridge between a running session (which blocks on decisions)
and the control API (where the console answers them). Decision requests and
value-entry requests park here until submitted; transcript events fan out
to every subscriber queue.
"""

from __future__ import annotations

import itertools
import queue
import threading
from dataclasses import dataclass, field
from typing import Optional

from ..gate import DecisionRequest, OracleChoice, OracleUnavailable
from ..transcript import TranscriptEvent

_CHOICE_VALUES = {c.value: c for c in OracleChoice}


def mask_event(event: TranscriptEvent) -> dict:
    """Strip runtime values before an event crosses the control API.

    The on-disk transcript keeps full call arguments and log text for the
    user's local records; the console's network layer must only ever see
    descriptors, digests, and shapes.
    """
    wire = event.as_wire()
    payload = dict(wire["payload"])
    if event.kind == "call":
        payload.pop("args", None)
        payload["args_masked"] = True
    elif event.kind == "log":
        text = payload.pop("text", "")
        payload["text_masked"] = True
        payload["length"] = len(text)
    wire["payload"] = payload
    return wire


@dataclass
class PendingDecision:
    request: DecisionRequest
    resolved: threading.Event = field(default_factory=threading.Event)
    choices: Optional[list[OracleChoice]] = None


@dataclass
class PendingValue:
    request_id: str
    key: str
    resolved: threading.Event = field(default_factory=threading.Event)
    value: Optional[str] = None
    rejected: bool = False


class ConsoleHub:
    def __init__(self):
        self._lock = threading.Lock()
        self._subscribers: list[queue.Queue] = []
        self._decisions: dict[str, PendingDecision] = {}
        self._values: dict[str, PendingValue] = {}
        self._value_ids = itertools.count(1)

    # ------------------------------------------------------------------
    # Event stream

    def subscribe(self) -> queue.Queue:
        q: queue.Queue = queue.Queue()
        with self._lock:
            self._subscribers.append(q)
        return q

    def unsubscribe(self, q: queue.Queue) -> None:
        with self._lock:
            if q in self._subscribers:
                self._subscribers.remove(q)

    def publish(self, event: dict) -> None:
        with self._lock:
            subscribers = list(self._subscribers)
        for q in subscribers:
            q.put(event)

    def transcript_sink(self, event: TranscriptEvent) -> None:
        self.publish({"type": "transcript", "event": mask_event(event)})

    # ------------------------------------------------------------------
    # Decision requests

    def enqueue_decision(self, request: DecisionRequest) -> PendingDecision:
        pending = PendingDecision(request)
        with self._lock:
            self._decisions[request.batch_id] = pending
        self.publish({"type": "decision_pending", "request": request.as_wire()})
        return pending

    def pending_decisions(self) -> list[DecisionRequest]:
        with self._lock:
            return [p.request for p in self._decisions.values() if not p.resolved.is_set()]

    def submit_decision(self, batch_id: str, raw_choices: list[str]) -> str:
        """Returns "ok", "duplicate", "unknown", or "invalid"."""
        with self._lock:
            pending = self._decisions.get(batch_id)
        if pending is None:
            return "unknown"
        if pending.resolved.is_set():
            return "duplicate"
        if len(raw_choices) != len(pending.request.pairs):
            return "invalid"
        try:
            choices = [_CHOICE_VALUES[c] for c in raw_choices]
        except KeyError:
            return "invalid"
        pending.choices = choices
        pending.resolved.set()
        self.publish({
            "type": "decision_resolved",
            "batch_id": batch_id,
            "choices": raw_choices,
        })
        return "ok"

    # ------------------------------------------------------------------
    # Value-entry requests

    def enqueue_value(self, key: str) -> PendingValue:
        request_id = f"v{next(self._value_ids)}"
        pending = PendingValue(request_id, key)
        with self._lock:
            self._values[request_id] = pending
        self.publish({"type": "value_pending", "request_id": request_id, "key": key})
        return pending

    def pending_values(self) -> list[PendingValue]:
        with self._lock:
            return [p for p in self._values.values() if not p.resolved.is_set()]

    def submit_value(self, request_id: str, value: Optional[str]) -> str:
        with self._lock:
            pending = self._values.get(request_id)
        if pending is None:
            return "unknown"
        if pending.resolved.is_set():
            return "duplicate"
        pending.value = value
        pending.rejected = value is None
        pending.resolved.set()
        self.publish({
            "type": "value_resolved",
            "request_id": request_id,
            "key": pending.key,
            "rejected": pending.rejected,
        })
        return "ok"


class RemoteConsoleOracle:
    """Blocks the session on the hub until the console answers."""

    def __init__(self, hub: ConsoleHub, timeout: Optional[float] = None):
        self.hub = hub
        self.timeout = timeout

    def decide(self, request: DecisionRequest) -> list[OracleChoice]:
        pending = self.hub.enqueue_decision(request)
        if not pending.resolved.wait(self.timeout):
            raise OracleUnavailable("no console decision before timeout")
        assert pending.choices is not None
        return pending.choices

    def supply_value(self, key: str) -> Optional[str]:
        pending = self.hub.enqueue_value(key)
        if not pending.resolved.wait(self.timeout):
            return None
        return pending.value

    def confirm_isa_value(self, key: str, value: str) -> bool:
        return False
