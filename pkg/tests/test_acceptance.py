"""Acceptance criteria, one test per criterion, each printing a PASS/FAIL line.

Covers: attack blocking over the scenario corpus, substitution-oracle
soundness, noninterference under denial, disclosure-log transitivity,
permission amortization, multi-shot semantics, annotation effects, and the
running-example artifact end to end.
"""

from __future__ import annotations

import json
import time

import pytest

from gaap.interp import ExecutionOutcome, execute_single, run_session
from gaap.orchestrator.oracles import allow_all_oracle, scripted_oracle
from gaap.orchestrator.providers import ScriptedProvider

from .support.fixtures import REPORT_ARTIFACT
from .support.harness import (
    FILESYSTEM_ANNOTATION,
    FOOD_ANNOTATION,
    STANDARD_ANNOTATIONS,
    WIKI_ANNOTATION,
    make_session,
)
from .support.progen import SOURCE_KEYS, generate_program
from .support.scenarios import ATTACKS, PHONE, PRIVATE_VALUES, SCENARIOS, SSN, Scenario
from .support.subst import (
    baseline_values,
    influence_sets,
    perturbed_values,
    run_program,
)

REPORT_SCENARIO_ANNOTATIONS = (FILESYSTEM_ANNOTATION, FOOD_ANNOTATION, WIKI_ANNOTATION)


def run_scenario(root, scenario: Scenario, artifact: str, oracle=None):
    bundle = make_session(
        root,
        oracle=oracle if oracle is not None else scripted_oracle(scenario.policy()),
        provider=ScriptedProvider(["x = 1"], list(scenario.qllm_answers)),
        pdb_values=PRIVATE_VALUES if not (root / "stores" / "pdb.jsonl").exists() else None,
        session_id=f"{scenario.name}-{int(time.time() * 1e6)}",
    )
    for name, content in scenario.seeds.items():
        bundle.write_file(name, content)
    if scenario.kv_seed:
        kv_path = bundle.sandbox / "kv.json"
        existing = json.loads(kv_path.read_text()) if kv_path.exists() else {}
        existing.update(scenario.kv_seed)
        kv_path.write_text(json.dumps(existing))
    outcome = execute_single(artifact, bundle.ctx)
    return outcome, bundle


def scan_for_phone_violations(bundle, scenario: Scenario) -> list[str]:
    """Phone bytes are allowed only at the scenario's granted entities."""
    violations = []
    allowed = {e.lower() for e in scenario.phone_allowed_entities}
    for entry in bundle.outbox():
        blob = json.dumps(entry, ensure_ascii=False)
        if PHONE in blob and str(entry.get("to", "")).lower() not in allowed:
            violations.append(f"outbox entry to {entry.get('to')}")
    for path in sorted(bundle.sandbox.rglob("*")):
        if not path.is_file() or path.name == "outbox.jsonl":
            continue
        if PHONE.encode() in path.read_bytes():
            relative = path.relative_to(bundle.sandbox)
            if str(relative) == "fs/card.txt" and "card.txt" in allowed:
                continue
            violations.append(str(relative))
    return violations


@pytest.mark.acceptance("attack-blocking")
def test_attack_blocking_zero_successes(tmp_path):
    started = time.perf_counter()
    failures = []
    for scenario in SCENARIOS:
        benign_outcome, _ = run_scenario(
            tmp_path / f"benign-{scenario.name}", scenario, scenario.artifact
        )
        if benign_outcome.status != ExecutionOutcome.COMPLETED:
            failures.append(
                f"benign {scenario.name}: {benign_outcome.status} {benign_outcome.message}"
            )
    assert not failures, failures

    attacked_runs = 0
    for attack_name, transform in ATTACKS.items():
        for scenario in SCENARIOS:
            attacked_runs += 1
            root = tmp_path / f"{attack_name}-{scenario.name}"
            outcome, bundle = run_scenario(root, scenario, transform(scenario))
            blob = bundle.sandbox_bytes()
            assert SSN.encode() not in blob, (
                f"{attack_name} on {scenario.name}: ssn bytes reached a mock server"
            )
            phone_violations = scan_for_phone_violations(bundle, scenario)
            assert not phone_violations, (
                f"{attack_name} on {scenario.name}: phone bytes at {phone_violations}"
            )
            serialized = json.dumps(outcome.public_json())
            assert SSN not in serialized and PHONE not in serialized
    assert attacked_runs >= 30
    elapsed = time.perf_counter() - started
    assert elapsed < 30, f"attack corpus took {elapsed:.1f}s (budget 30s)"


@pytest.mark.acceptance("taint-oracle-soundness")
def test_soundness_against_substitution_oracle(tmp_path):
    started = time.perf_counter()
    checked_programs = 0
    checked_sinks = 0
    for index in range(500):
        straight = index % 5 < 2  # 200 straight-line, 300 with branches/loops
        source = generate_program(
            seed=0xBEE5 + index, n_sources=3, max_stmts=20, branchy=not straight
        )
        baseline, influences = influence_sets(source, tmp_path)
        checked_programs += 1
        for position, observed in enumerate(baseline.calls):
            checked_sinks += 1
            influence = influences[position]
            assert influence <= observed.items, (
                f"program {index} sink {position}: influence {influence} not "
                f"covered by disclosure set {set(observed.items)}\n{source}"
            )
            if straight:
                pdb_items = {i for i in observed.items if i.startswith("pdb:")}
                assert pdb_items == influence, (
                    f"program {index} sink {position}: straight-line inexact: "
                    f"taints {pdb_items} vs influence {influence}\n{source}"
                )
    assert checked_programs == 500
    assert checked_sinks > 500
    elapsed = time.perf_counter() - started
    assert elapsed < 120, f"soundness corpus took {elapsed:.1f}s (budget 120s)"


@pytest.mark.acceptance("noninterference-under-denial")
def test_noninterference_under_deny_all(tmp_path):
    started = time.perf_counter()
    for index in range(100):
        source = generate_program(seed=0xD0_0D + index, n_sources=3,
                                  max_stmts=16, branchy=True)
        values_a = baseline_values()
        flip_key = SOURCE_KEYS[index % 3]
        values_b = perturbed_values(values_a, flip_key)
        trace_a = run_program(source, values_a, tmp_path, deny_all=True)
        trace_b = run_program(source, values_b, tmp_path, deny_all=True)
        common = min(len(trace_a.calls), len(trace_b.calls))
        for position in range(common):
            assert trace_a.calls[position].same_emission(trace_b.calls[position]), (
                f"program {index}: emitted calls diverge at {position}\n{source}"
            )
        if len(trace_a.calls) != len(trace_b.calls):
            shorter = trace_a if len(trace_a.calls) < len(trace_b.calls) else trace_b
            assert shorter.status == ExecutionOutcome.DENIED, (
                f"program {index}: shorter transcript did not end in denial\n{source}"
            )
        else:
            assert trace_a.status == trace_b.status
    elapsed = time.perf_counter() - started
    assert elapsed < 60, f"noninterference corpus took {elapsed:.1f}s (budget 60s)"


UPLOAD_TASK = (
    'fs = mcp_helper.connect("filesystem")\n'
    'data = fs.process_query("read_file", args={"path": "secret_info.txt"})\n'
    'kv = mcp_helper.connect("remote_kv")\n'
    'kv.process_query("put", args={"key": "report", "value": data})\n'
)

READ_AND_EMAIL_TASK = (
    'kv = mcp_helper.connect("remote_kv")\n'
    'v = kv.process_query("get", args={"key": "report"})\n'
    'email = mcp_helper.connect("email")\n'
    'email.process_query("send_email", args={"to": "joe@example.com", "body": v})\n'
)

SECRET_ITEM = "filesystem.read_file path=secret_info.txt"


@pytest.mark.acceptance("disclosure-log-transitivity")
def test_transitive_disclosure_raises_exactly_one_new_pair(tmp_path):
    secret = "SECRET-INFO-CONTENT-4242"

    def prompted_pairs_for_task2(root, with_history: bool) -> set[tuple[str, str]]:
        if with_history:
            upload_oracle = scripted_oracle({
                "default": "deny",
                "rules": [{"item": SECRET_ITEM, "entity": "remote_kv",
                           "decision": "allow"}],
            })
            bundle = make_session(root, oracle=upload_oracle,
                                  pdb_values=PRIVATE_VALUES)
            bundle.write_file("secret_info.txt", secret)
            outcome = execute_single(UPLOAD_TASK, bundle.ctx)
            assert outcome.status == ExecutionOutcome.COMPLETED
        else:
            bundle = make_session(root, pdb_values=PRIVATE_VALUES)
            (bundle.sandbox / "kv.json").write_text(json.dumps({"report": secret}))
        observer = allow_all_oracle()
        task2 = make_session(root, oracle=observer)
        outcome = execute_single(READ_AND_EMAIL_TASK, task2.ctx)
        assert outcome.status == ExecutionOutcome.COMPLETED
        return {(c["item"], c["entity"]) for c in observer.consultations}

    with_history = prompted_pairs_for_task2(tmp_path / "history", True)
    baseline = prompted_pairs_for_task2(tmp_path / "baseline", False)
    assert with_history - baseline == {(SECRET_ITEM, "joe@example.com")}

    # denied: the one new pair blocks the email entirely
    denial_root = tmp_path / "denied"
    upload_oracle = scripted_oracle({
        "default": "deny",
        "rules": [{"item": SECRET_ITEM, "entity": "remote_kv", "decision": "allow"}],
    })
    bundle = make_session(denial_root, oracle=upload_oracle, pdb_values=PRIVATE_VALUES)
    bundle.write_file("secret_info.txt", secret)
    assert execute_single(UPLOAD_TASK, bundle.ctx).status == ExecutionOutcome.COMPLETED
    deny_oracle = scripted_oracle({
        "default": "allow",
        "rules": [{"item": SECRET_ITEM, "entity": "joe@example.com",
                   "decision": "deny"}],
    })
    task2 = make_session(denial_root, oracle=deny_oracle)
    outcome = execute_single(READ_AND_EMAIL_TASK, task2.ctx)
    assert outcome.status == ExecutionOutcome.DENIED
    assert task2.outbox() == []
    assert secret.encode() not in (task2.sandbox / "outbox.jsonl").read_bytes() \
        if (task2.sandbox / "outbox.jsonl").exists() else True


@pytest.mark.acceptance("permission-amortization")
def test_permission_persistence_reduces_prompts(tmp_path):
    def run_sequence(root, reset_between: bool) -> tuple[int, int]:
        pair_questions = 0
        round_trips = 0
        seeded = False
        for scenario in SCENARIOS:
            if reset_between:
                permissions_file = root / "stores" / "permissions.jsonl"
                if permissions_file.exists():
                    permissions_file.unlink()
            bundle = make_session(
                root,
                oracle=scripted_oracle(scenario.policy()),
                provider=ScriptedProvider(["x = 1"], list(scenario.qllm_answers)),
                pdb_values=None if seeded else PRIVATE_VALUES,
            )
            seeded = True
            for name, content in scenario.seeds.items():
                bundle.write_file(name, content)
            if scenario.kv_seed:
                kv_path = bundle.sandbox / "kv.json"
                existing = json.loads(kv_path.read_text()) if kv_path.exists() else {}
                existing.update(scenario.kv_seed)
                kv_path.write_text(json.dumps(existing))
            outcome = execute_single(scenario.artifact, bundle.ctx)
            assert outcome.status == ExecutionOutcome.COMPLETED, (
                f"{scenario.name}: {outcome.message}"
            )
            pair_questions += bundle.ctx.gate.stats.pair_questions
            round_trips += bundle.ctx.gate.stats.round_trips
        return pair_questions, round_trips

    with_persistence, trips_persist = run_sequence(tmp_path / "persist", False)
    with_reset, trips_reset = run_sequence(tmp_path / "reset", True)
    assert with_persistence < with_reset
    assert trips_persist <= with_persistence
    assert trips_reset <= with_reset


READ_INFO_AND_HANDOFF = (
    'fs = mcp_helper.connect("filesystem")\n'
    'content = fs.process_query("read_file", args={"path": "information.txt"})\n'
    'multishot(f"Please complete the task written in the file: {content}")\n'
)

SECOND_SHOT = (
    'food = mcp_helper.connect("food_order")\n'
    'food.process_query("place", args={"ordered_food_items": ["coffee"], '
    '"password": "artifact-pw"})\n'
    'email = mcp_helper.connect("email")\n'
    'email.process_query("send_email", args={"to": "cafe@example.com", '
    '"body": "order placed"})\n'
)

INFO_ITEM = "filesystem.read_file path=information.txt"


@pytest.mark.acceptance("multi-shot-semantics")
def test_multishot_taints_every_later_call(tmp_path):
    provider = ScriptedProvider([READ_INFO_AND_HANDOFF, SECOND_SHOT])
    bundle = make_session(tmp_path / "allowed", provider=provider,
                          oracle=allow_all_oracle())
    bundle.write_file("information.txt", "get a coffee and confirm")
    outcome = run_session("complete the task in information.txt", "sys", bundle.ctx)
    assert outcome.status == ExecutionOutcome.COMPLETED
    shot2_calls = [e for e in bundle.ctx.transcript.calls() if e.payload["shot"] == 2]
    assert len(shot2_calls) >= 2
    for call in shot2_calls:
        items = {p["item_text"] for p in call.payload["items"]}
        assert INFO_ITEM in items, f"shot-2 call missing file item: {items}"

    provider = ScriptedProvider([READ_INFO_AND_HANDOFF, SECOND_SHOT])
    deny = scripted_oracle({
        "default": "allow",
        "rules": [{"item": INFO_ITEM, "entity": "model-provider", "decision": "deny"}],
    })
    denied_bundle = make_session(tmp_path / "denied", provider=provider, oracle=deny)
    denied_bundle.write_file("information.txt", "get a coffee")
    outcome = run_session("complete the task", "sys", denied_bundle.ctx)
    assert outcome.status == ExecutionOutcome.DENIED
    shot2 = [e for e in denied_bundle.ctx.transcript.calls() if e.payload["shot"] == 2]
    assert shot2 == []


ORDER_THEN_FORWARD_STATUS = (
    'food = mcp_helper.connect("food_order")\n'
    'food.process_query("place", args={"ordered_food_items": '
    '[priv_data_db.access_usual_order()], "password": priv_data_db.access_food_pw()})\n'
    's = food.process_query("status", args={})\n'
    'email = mcp_helper.connect("email")\n'
    'email.process_query("send_email", args={"to": "boss@corp.example", '
    '"body": f"order update: {s}"})\n'
)


@pytest.mark.acceptance("annotation-effects")
def test_password_passthrough_annotation(tmp_path):
    # With the food-order annotation: the forwarded status requires approval
    # for the ordered items' source but never surfaces the password pair.
    observer = allow_all_oracle()
    bundle = make_session(tmp_path / "annotated", oracle=observer,
                          pdb_values=PRIVATE_VALUES,
                          annotations=STANDARD_ANNOTATIONS)
    outcome = execute_single(ORDER_THEN_FORWARD_STATUS, bundle.ctx)
    assert outcome.status == ExecutionOutcome.COMPLETED
    email_entity = "boss@corp.example"
    asked = {(c["item"], c["entity"]) for c in observer.consultations}
    assert ("pdb:usual_order", email_entity) in asked
    assert ("food_order.status", email_entity) in asked
    assert ("pdb:food_pw", email_entity) not in asked

    # With no annotation files: conservative default surfaces both pairs.
    observer = allow_all_oracle()
    bundle = make_session(tmp_path / "bare", oracle=observer,
                          pdb_values=PRIVATE_VALUES, annotations=None)
    outcome = execute_single(ORDER_THEN_FORWARD_STATUS, bundle.ctx)
    assert outcome.status == ExecutionOutcome.COMPLETED
    asked = {(c["item"], c["entity"]) for c in observer.consultations}
    assert ("pdb:food_pw", "email") in asked
    assert ("pdb:usual_order", "email") in asked


@pytest.mark.acceptance("running-example-end-to-end")
def test_report_artifact_both_branches(tmp_path):
    def seeded(root, provider):
        bundle = make_session(
            root, provider=provider,
            oracle=allow_all_oracle({"manager_email": "mgr@example.com"}),
            pdb_values={"name": "Sam Park"},
            annotations=REPORT_SCENARIO_ANNOTATIONS,
        )
        bundle.write_file("annual_report.txt", "Revenue rose 12%.")
        return bundle

    # more_needed = false: the report goes out directly
    provider = ScriptedProvider([REPORT_ARTIFACT], qllm_answers=["no"])
    bundle = seeded(tmp_path / "direct", provider)
    outcome = run_session("send the report to my manager", "sys", bundle.ctx)
    assert outcome.status == ExecutionOutcome.COMPLETED
    assert outcome.shots_executed == 1
    outbox = bundle.outbox()
    assert len(outbox) == 1
    assert "Hi, this is Sam Park." in outbox[0]["body"]
    assert "Revenue rose 12%." in outbox[0]["body"]

    # more_needed = true: multishot, then the follow-up artifact finishes
    second = (
        'email = mcp_helper.connect("email")\n'
        'email.process_query("send_email", args={"body": "completed report v2"})\n'
    )
    provider = ScriptedProvider([REPORT_ARTIFACT, second], qllm_answers=["yes"])
    bundle = seeded(tmp_path / "handoff", provider)
    outcome = run_session("send the report to my manager", "sys", bundle.ctx)
    assert outcome.status == ExecutionOutcome.COMPLETED
    assert outcome.shots_executed == 2
    assert bundle.outbox()[0]["body"] == "completed report v2"
