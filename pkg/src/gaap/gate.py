"""Policy gate: the authorization kernel for pending tool calls.

For each pending call the gate computes the full disclosure set (argument
taints, control-flow taints, session taints, transitively expanded through
the disclosure log), checks each (item, entity) pair against the permission
store, batches unknown pairs into a single question round-trip to the
decision oracle, and — only if every pair is allowed — writes disclosure
records ahead of the call. Every error path blocks; nothing is emitted
without an Authorized result.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Optional, Protocol

from .annotations import AnnotationRegistry, ResolvedEntity
from .canon import digest
from .disclosure import DisclosureLog, DisclosureLogError
from .permissions import Decision, PermissionDB
from .taint import (
    ExtSource,
    ItemDescriptor,
    ModelSession,
    PdbKey,
    TaintedValue,
    ExtItem,
    PdbItem,
    from_plain,
    item_to_wire,
    render_item,
)
from .transcript import Transcript


class OracleChoice(enum.Enum):
    ALLOW_ONCE = "allow_once"
    ALLOW_ALWAYS = "allow_always"
    DENY = "deny"


class OracleUnavailable(Exception):
    pass


@dataclass(frozen=True)
class DisclosurePair:
    item: ItemDescriptor
    entity: str

    def as_wire(self) -> dict:
        return {"item": item_to_wire(self.item), "item_text": render_item(self.item),
                "entity": self.entity}


@dataclass(frozen=True)
class DecisionRequest:
    """One batched question round-trip; descriptors only, never values."""

    batch_id: str
    session_id: str
    server: str
    tool: str
    pairs: tuple[DisclosurePair, ...]
    questions: tuple[str, ...]

    def as_wire(self) -> dict:
        return {
            "batch_id": self.batch_id,
            "session_id": self.session_id,
            "server": self.server,
            "tool": self.tool,
            "pairs": [p.as_wire() for p in self.pairs],
            "questions": list(self.questions),
        }


class DecisionOracle(Protocol):
    """The deciding principal: a human at a console, or a scripted policy."""

    def decide(self, request: DecisionRequest) -> list[OracleChoice]: ...


@dataclass(frozen=True)
class PendingCall:
    server: str
    tool: str
    entity: ResolvedEntity
    args: dict[str, TaintedValue]
    pc_taints: frozenset
    session_taints: frozenset
    model_items: tuple[ItemDescriptor, ...]
    session_id: str
    shot_index: int


@dataclass(frozen=True)
class Authorized:
    args_digest: str
    pairs: tuple[DisclosurePair, ...]
    disclosure_seqs: tuple[int, ...]


@dataclass(frozen=True)
class Blocked:
    pairs: tuple[DisclosurePair, ...]
    reason: str = "denied"


@dataclass
class GateStats:
    pair_questions: int = 0
    round_trips: int = 0


def render_question(pair: DisclosurePair, server: str, tool: str) -> str:
    return (
        f"Share {render_item(pair.item)} with {pair.entity} "
        f"(via {server}.{tool})? [allow once / allow always / deny]"
    )


class PolicyGate:
    def __init__(
        self,
        permissions: PermissionDB,
        disclosures: DisclosureLog,
        annotations: AnnotationRegistry,
        oracle: DecisionOracle,
        transcript: Transcript,
        session_id: str,
    ):
        self.permissions = permissions
        self.disclosures = disclosures
        self.annotations = annotations
        self.oracle = oracle
        self.transcript = transcript
        self.session_id = session_id
        self.stats = GateStats()
        self._batch_counter = itertools.count(1)

    # ------------------------------------------------------------------
    # Disclosure computation

    def expand_labels(
        self, labels: frozenset, model_items: tuple[ItemDescriptor, ...]
    ) -> set[ItemDescriptor]:
        """All items a set of taint labels may carry, log-expanded."""
        items: set[ItemDescriptor] = set()
        for label in labels:
            if isinstance(label, PdbKey):
                items.add(PdbItem(label.key))
            elif isinstance(label, ExtSource):
                items.add(ExtItem(label.entity, label.server, label.tool, label.selector))
                items |= self.disclosures.items_disclosed_to(
                    label.entity, label.seq, self.annotations.passthrough_eligible
                )
            elif isinstance(label, ModelSession):
                items.update(model_items)
        return items

    def compute_disclosures(self, call: PendingCall) -> set[tuple[ItemDescriptor, str]]:
        items = self._all_items(call)
        return {(item, call.entity.entity) for item in items}

    def _arg_items(self, call: PendingCall) -> dict[str, set[ItemDescriptor]]:
        return {
            name: self.expand_labels(value.deep_taints(), call.model_items)
            for name, value in call.args.items()
        }

    def _all_items(self, call: PendingCall) -> set[ItemDescriptor]:
        items: set[ItemDescriptor] = set()
        for per_arg in self._arg_items(call).values():
            items |= per_arg
        items |= self.expand_labels(
            call.pc_taints | call.session_taints, call.model_items
        )
        return items

    # ------------------------------------------------------------------
    # Authorization

    def authorize(self, call: PendingCall) -> Authorized | Blocked:
        entity = call.entity.entity
        arg_items = self._arg_items(call)
        flow_items = self.expand_labels(
            call.pc_taints | call.session_taints, call.model_items
        )
        all_items = sorted(
            set().union(*arg_items.values(), flow_items), key=render_item
        )
        pairs = tuple(DisclosurePair(item, entity) for item in all_items)

        denied = tuple(
            p for p in pairs
            if self.permissions.check(p.item, p.entity) is Decision.DENY
        )
        if denied:
            return self._blocked(call, denied, "denied by stored permission")

        unknown = tuple(
            p for p in pairs
            if self.permissions.check(p.item, p.entity) is Decision.UNKNOWN
        )
        if unknown:
            outcome = self._consult_oracle(call, unknown)
            if isinstance(outcome, Blocked):
                return outcome

        return self._authorize_and_log(call, pairs, arg_items)

    def _consult_oracle(
        self, call: PendingCall, unknown: tuple[DisclosurePair, ...]
    ) -> Optional[Blocked]:
        batch_id = f"{self.session_id}-b{next(self._batch_counter)}"
        request = DecisionRequest(
            batch_id=batch_id,
            session_id=self.session_id,
            server=call.server,
            tool=call.tool,
            pairs=unknown,
            questions=tuple(
                render_question(p, call.server, call.tool) for p in unknown
            ),
        )
        self.stats.pair_questions += len(unknown)
        self.stats.round_trips += 1
        self.transcript.append("decision", {
            "phase": "pending", "batch_id": batch_id,
            "server": call.server, "tool": call.tool,
            "pairs": [p.as_wire() for p in unknown],
        })
        try:
            choices = self.oracle.decide(request)
            if len(choices) != len(unknown):
                raise OracleUnavailable("oracle answered the wrong number of pairs")
        except Exception as exc:
            self.transcript.append("decision", {
                "phase": "oracle_error", "batch_id": batch_id,
                "error": type(exc).__name__,
            })
            return self._blocked(call, unknown, "decision oracle unavailable")

        denied: list[DisclosurePair] = []
        for pair, choice in zip(unknown, choices):
            if choice is OracleChoice.ALLOW_ALWAYS:
                self.permissions.record(pair.item, pair.entity, Decision.ALLOW)
            elif choice is OracleChoice.DENY:
                self.permissions.record(pair.item, pair.entity, Decision.DENY)
                denied.append(pair)
            # ALLOW_ONCE: not persisted; the disclosure log still records it.
        self.transcript.append("decision", {
            "phase": "resolved", "batch_id": batch_id,
            "choices": [c.value for c in choices],
        })
        if denied:
            return self._blocked(call, tuple(denied), "denied by user decision")
        return None

    def _authorize_and_log(
        self,
        call: PendingCall,
        pairs: tuple[DisclosurePair, ...],
        arg_items: dict[str, set[ItemDescriptor]],
    ) -> Authorized | Blocked:
        args_plain = {name: value.plain() for name, value in call.args.items()}
        arg_digests = {name: digest(value) for name, value in args_plain.items()}
        seqs: list[int] = []
        try:
            for pair in pairs:
                causal = sorted(
                    name for name, items in arg_items.items() if pair.item in items
                )
                seqs.append(self.disclosures.append(
                    pair.item, pair.entity, call.server, call.tool,
                    causal, [arg_digests[name] for name in causal],
                    call.session_id,
                ))
        except DisclosureLogError:
            return self._blocked(call, pairs, "disclosure log write failed")

        authorized = Authorized(
            args_digest=digest(args_plain),
            pairs=pairs,
            disclosure_seqs=tuple(seqs),
        )
        self.transcript.append("decision", {
            "phase": "authorized",
            "server": call.server, "tool": call.tool,
            "entity": call.entity.entity,
            "args_digest": authorized.args_digest,
            "pairs": [p.as_wire() for p in pairs],
        })
        return authorized

    def _blocked(
        self, call: PendingCall, pairs: tuple[DisclosurePair, ...], reason: str
    ) -> Blocked:
        self.transcript.append("decision", {
            "phase": "blocked",
            "server": call.server, "tool": call.tool,
            "entity": call.entity.entity,
            "reason": reason,
            "pairs": [p.as_wire() for p in pairs],
        })
        return Blocked(pairs, reason)

    # ------------------------------------------------------------------
    # Output tainting

    def taint_output(self, call: PendingCall, raw_result) -> TaintedValue:
        """Label a tool result with its source, honoring output_public."""
        if self.annotations.output_public(call.server, call.tool):
            return from_plain(raw_result)
        label = ExtSource(
            entity=call.entity.entity,
            server=call.server,
            tool=call.tool,
            seq=self.disclosures.head,
            selector=call.entity.selector,
        )
        return from_plain(raw_result, frozenset({label}))
