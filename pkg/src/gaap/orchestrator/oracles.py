"""Decision oracles: scripted policy files and the interactive CLI.

The scripted oracle is the deterministic test double for the human: a rule
file maps (item pattern, entity pattern) to a decision, with a default.
Rules are first-match-wins; duplicate patterns with conflicting decisions
are a load-time config error. Every consulted rule is logged.
"""

from __future__ import annotations

import fnmatch
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from ..gate import DecisionRequest, OracleChoice
from ..taint import render_item

_CHOICES = {
    "allow": OracleChoice.ALLOW_ALWAYS,
    "allow_always": OracleChoice.ALLOW_ALWAYS,
    "allow_once": OracleChoice.ALLOW_ONCE,
    "deny": OracleChoice.DENY,
}


class OracleConfigError(Exception):
    pass


@dataclass(frozen=True)
class PolicyRule:
    item_pattern: str
    entity_pattern: str
    choice: OracleChoice

    def matches(self, item_text: str, entity: str) -> bool:
        return fnmatch.fnmatchcase(item_text, self.item_pattern) and fnmatch.fnmatchcase(
            entity, self.entity_pattern
        )


@dataclass
class ScriptedPolicyOracle:
    rules: list[PolicyRule] = field(default_factory=list)
    default: OracleChoice = OracleChoice.DENY
    values: dict[str, str] = field(default_factory=dict)
    isa_confirm: bool = False
    consultations: list[dict] = field(default_factory=list)
    value_requests: list[str] = field(default_factory=list)

    # ------------------------------------------------------------------

    def decide(self, request: DecisionRequest) -> list[OracleChoice]:
        choices: list[OracleChoice] = []
        for pair in request.pairs:
            item_text = render_item(pair.item)
            choice = self.default
            rule_index: Optional[int] = None
            for index, rule in enumerate(self.rules):
                if rule.matches(item_text, pair.entity):
                    choice = rule.choice
                    rule_index = index
                    break
            self.consultations.append({
                "item": item_text,
                "entity": pair.entity,
                "rule": rule_index,
                "decision": choice.value,
            })
            choices.append(choice)
        return choices

    def supply_value(self, key: str) -> Optional[str]:
        self.value_requests.append(key)
        return self.values.get(key)

    def confirm_isa_value(self, key: str, value: str) -> bool:
        return self.isa_confirm


def scripted_oracle(config: dict | str | Path) -> ScriptedPolicyOracle:
    """Build a scripted oracle from a policy dict or JSON file."""
    if not isinstance(config, dict):
        config = json.loads(Path(config).read_text(encoding="utf-8"))
    default_raw = config.get("default", "deny")
    if default_raw not in _CHOICES:
        raise OracleConfigError(f"unknown default decision {default_raw!r}")
    rules: list[PolicyRule] = []
    seen: dict[tuple[str, str], str] = {}
    for index, raw in enumerate(config.get("rules", [])):
        item = raw.get("item", "*")
        entity = raw.get("entity", "*")
        decision = raw.get("decision")
        if decision not in _CHOICES:
            raise OracleConfigError(f"rule {index}: unknown decision {decision!r}")
        pattern_key = (item, entity)
        if pattern_key in seen and seen[pattern_key] != decision:
            raise OracleConfigError(
                f"rule {index}: ({item!r}, {entity!r}) already mapped to "
                f"{seen[pattern_key]!r}; overlapping rules are ambiguous"
            )
        seen[pattern_key] = decision
        rules.append(PolicyRule(item, entity, _CHOICES[decision]))
    values = config.get("values", {})
    if not isinstance(values, dict):
        raise OracleConfigError("values must map keys to text")
    return ScriptedPolicyOracle(
        rules=rules,
        default=_CHOICES[default_raw],
        values=dict(values),
        isa_confirm=bool(config.get("isa_confirm", False)),
    )


def allow_all_oracle(values: Optional[dict[str, str]] = None) -> ScriptedPolicyOracle:
    return ScriptedPolicyOracle(default=OracleChoice.ALLOW_ALWAYS, values=dict(values or {}))


def deny_all_oracle() -> ScriptedPolicyOracle:
    return ScriptedPolicyOracle(default=OracleChoice.DENY)


class InteractiveCliOracle:
    """Stdin/stdout prompts; one line per pair: a(lways), o(nce), or d(eny)."""

    def __init__(self, infile=None, outfile=None):
        self.infile = infile or sys.stdin
        self.outfile = outfile or sys.stdout

    def decide(self, request: DecisionRequest) -> list[OracleChoice]:
        choices: list[OracleChoice] = []
        for question in request.questions:
            self.outfile.write(question + "\n")
            self.outfile.write("  [a]llow always / allow [o]nce / [d]eny > ")
            self.outfile.flush()
            answer = self.infile.readline().strip().lower()
            if answer in ("a", "always", "allow", "allow_always"):
                choices.append(OracleChoice.ALLOW_ALWAYS)
            elif answer in ("o", "once", "allow_once"):
                choices.append(OracleChoice.ALLOW_ONCE)
            else:
                choices.append(OracleChoice.DENY)
        return choices

    def supply_value(self, key: str) -> Optional[str]:
        self.outfile.write(
            f"The agent asks to store a new private value for key {key!r}.\n"
            "Enter the value, or an empty line to refuse > "
        )
        self.outfile.flush()
        line = self.infile.readline()
        value = line.rstrip("\n")
        return value if value else None

    def confirm_isa_value(self, key: str, value: str) -> bool:
        self.outfile.write(f"Store the found value for {key!r}? [y/N] > ")
        self.outfile.flush()
        return self.infile.readline().strip().lower() in ("y", "yes")
