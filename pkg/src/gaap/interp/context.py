"""Execution context, wired services, and session outcomes."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Protocol

from ..annotations import AnnotationRegistry
from ..broker.client import Broker
from ..disclosure import DisclosureLog
from ..gate import DecisionRequest, DisclosurePair, OracleChoice, PolicyGate
from ..permissions import PermissionDB
from ..private_data import InformationSeeker, PrivateDataDB, StubInformationSeeker
from ..taint import EMPTY_TAINTS, ItemDescriptor
from ..transcript import Transcript

QLLM_RETURN_TYPES = ("bool", "int", "float", "string")


class UserOracle(Protocol):
    """Decision oracle plus the user-entry prompts the store needs."""

    def decide(self, request: DecisionRequest) -> list[OracleChoice]: ...

    def supply_value(self, key: str) -> Optional[str]: ...

    def confirm_isa_value(self, key: str, value: str) -> bool: ...


class ModelProvider(Protocol):
    def next_artifact(
        self,
        system_prompt: str,
        user_prompt: str,
        handoff_query: Optional[str],
        shot: int,
    ) -> str: ...

    def qllm(self, prompt: str, data_text: Optional[str], return_type: str) -> str: ...


@dataclass
class Services:
    pdb: PrivateDataDB
    permissions: PermissionDB
    disclosures: DisclosureLog
    annotations: AnnotationRegistry
    broker: Broker
    oracle: UserOracle
    provider: ModelProvider
    isa: InformationSeeker = field(default_factory=StubInformationSeeker)
    isa_enabled: bool = False


@dataclass
class ExecutionContext:
    services: Services
    session_id: str
    transcript: Transcript = field(default_factory=Transcript)
    shot_limit: int = 8
    env: dict = field(default_factory=dict)
    pc_stack: list = field(default_factory=list)
    session_taints: frozenset = EMPTY_TAINTS
    items_sent_to_model: tuple[ItemDescriptor, ...] = ()
    shot_index: int = 1
    gate: PolicyGate = field(init=False)

    def __post_init__(self) -> None:
        self.gate = PolicyGate(
            permissions=self.services.permissions,
            disclosures=self.services.disclosures,
            annotations=self.services.annotations,
            oracle=self.services.oracle,
            transcript=self.transcript,
            session_id=self.session_id,
        )

    @property
    def pc_taint(self) -> frozenset:
        taints = EMPTY_TAINTS
        for entry in self.pc_stack:
            taints |= entry
        return taints

    def note_model_items(self, items) -> None:
        seen = set(self.items_sent_to_model)
        added = [item for item in items if item not in seen]
        if added:
            self.items_sent_to_model = self.items_sent_to_model + tuple(added)


@dataclass
class ExecutionOutcome:
    status: str  # "completed" | "disclosure_denied" | "runtime_fault"
    pairs: tuple[DisclosurePair, ...] = ()
    message: str = ""
    shots_executed: int = 0
    transcript: Optional[Transcript] = None

    COMPLETED = "completed"
    DENIED = "disclosure_denied"
    FAULT = "runtime_fault"

    def public_json(self) -> dict:
        """Serialized outcome: descriptors and counts only, never values."""
        return {
            "status": self.status,
            "pairs": [p.as_wire() for p in self.pairs],
            "message": self.message,
            "shots_executed": self.shots_executed,
            "events": len(self.transcript.events) if self.transcript else 0,
        }
