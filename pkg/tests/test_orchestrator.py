"""run_task pipeline, scripted oracle, system prompt hygiene, CLI exit codes."""

from __future__ import annotations

import json
import re

import pytest

from gaap.interp import ExecutionOutcome
from gaap.orchestrator import (
    OracleConfigError,
    build_oracle,
    build_provider,
    build_runtime,
    load_config,
    run_task,
    scripted_oracle,
    system_prompt_for,
)
from gaap.orchestrator.cli import (
    EXIT_COMPLETED,
    EXIT_CONFIG,
    EXIT_DENIED,
    EXIT_FAULT,
    EXIT_USAGE,
    main,
)
from gaap.gate import DecisionRequest, DisclosurePair, OracleChoice
from gaap.taint import PdbItem

from .support.fixtures import REPORT_ARTIFACT
from .support.harness import (
    FILESYSTEM_ANNOTATION,
    FOOD_ANNOTATION,
    WIKI_ANNOTATION,
    make_workspace,
)

REPORT_ANNOTATIONS = (FILESYSTEM_ANNOTATION, FOOD_ANNOTATION, WIKI_ANNOTATION)


def seed_report_file(root, content="Numbers: 1, 2, 3."):
    fs_root = root / "sandbox" / "fs"
    fs_root.mkdir(parents=True, exist_ok=True)
    (fs_root / "annual_report.txt").write_text(content)


def run_workspace(config_path, prompt="send the report to my manager", task_id="t1"):
    cfg = load_config(config_path)
    runtime = build_runtime(cfg)
    provider = build_provider(cfg)
    oracle = build_oracle(cfg, None)
    return run_task(prompt, runtime, oracle, provider, task_id=task_id)


class TestScriptedOracle:
    def request(self, *pairs):
        return DecisionRequest(
            batch_id="b1", session_id="s1", server="email", tool="send_email",
            pairs=tuple(DisclosurePair(PdbItem(k), e) for k, e in pairs),
            questions=(),
        )

    def test_rule_matching_and_default(self):
        oracle = scripted_oracle({
            "default": "deny",
            "rules": [{"item": "pdb:ssn", "entity": "*", "decision": "deny"},
                      {"item": "pdb:*", "entity": "mgr@x.com", "decision": "allow"}],
        })
        choices = oracle.decide(self.request(("ssn", "mgr@x.com"), ("name", "mgr@x.com"),
                                             ("name", "other@x.com")))
        assert choices == [OracleChoice.DENY, OracleChoice.ALLOW_ALWAYS, OracleChoice.DENY]
        assert [c["rule"] for c in oracle.consultations] == [0, 1, None]

    def test_empty_default_deny_is_deny_all(self):
        oracle = scripted_oracle({"default": "deny"})
        choices = oracle.decide(self.request(("anything", "anywhere")))
        assert choices == [OracleChoice.DENY]

    def test_conflicting_duplicate_rules_rejected_at_load(self):
        with pytest.raises(OracleConfigError, match="ambiguous"):
            scripted_oracle({
                "rules": [
                    {"item": "pdb:a", "entity": "e", "decision": "allow"},
                    {"item": "pdb:a", "entity": "e", "decision": "deny"},
                ]
            })

    def test_unknown_decision_rejected(self):
        with pytest.raises(OracleConfigError):
            scripted_oracle({"rules": [{"item": "a", "entity": "b", "decision": "maybe"}]})


class TestRunTask:
    def test_report_scenario_completes_with_email_effect(self, tmp_path):
        config = make_workspace(
            tmp_path, [REPORT_ARTIFACT],
            policy={"default": "allow", "values": {"manager_email": "mgr@example.com"}},
            pdb_values={"name": "Sam Park"},
            qllm_answers=["no"],
            annotations=REPORT_ANNOTATIONS,
        )
        seed_report_file(tmp_path)
        outcome, task_dir = run_workspace(config)
        assert outcome.status == ExecutionOutcome.COMPLETED
        outbox = (tmp_path / "sandbox" / "outbox.jsonl").read_text()
        assert "Sam Park" in outbox
        assert (task_dir / "artifact-1.as").read_text() == REPORT_ARTIFACT
        assert (task_dir / "transcript.jsonl").exists()
        outcome_json = json.loads((task_dir / "outcome.json").read_text())
        assert outcome_json["status"] == "completed"

    def test_denied_scenario_leaves_outbox_empty(self, tmp_path):
        config = make_workspace(
            tmp_path, [REPORT_ARTIFACT],
            policy={
                "default": "allow",
                "values": {"manager_email": "mgr@example.com"},
                "rules": [{"item": "filesystem.read_file*", "entity": "email",
                           "decision": "deny"}],
            },
            pdb_values={"name": "Sam Park"},
            qllm_answers=["no"],
            annotations=REPORT_ANNOTATIONS,
        )
        seed_report_file(tmp_path)
        outcome, _ = run_workspace(config)
        assert outcome.status == ExecutionOutcome.DENIED
        assert not (tmp_path / "sandbox" / "outbox.jsonl").exists()

    def test_outcome_json_contains_no_private_values(self, tmp_path):
        config = make_workspace(
            tmp_path, [REPORT_ARTIFACT],
            policy={"default": "deny", "values": {"manager_email": "mgr@example.com"}},
            pdb_values={"name": "Sam Park"},
            qllm_answers=["no"],
            annotations=REPORT_ANNOTATIONS,
        )
        seed_report_file(tmp_path, content="secret-report-body-9183")
        outcome, task_dir = run_workspace(config)
        blob = (task_dir / "outcome.json").read_text()
        assert "Sam Park" not in blob
        assert "secret-report-body-9183" not in blob

    def test_prompt_reaches_provider_verbatim(self, tmp_path):
        config = make_workspace(tmp_path, ["x = 1"])
        cfg = load_config(config)
        runtime = build_runtime(cfg)
        provider = build_provider(cfg)
        oracle = build_oracle(cfg, None)
        prompt = "exact é bytes {with} braces"
        run_task(prompt, runtime, oracle, provider, task_id="t")
        assert provider.requests[0]["user_prompt"] == prompt

    def test_determinism_modulo_timestamps(self, tmp_path):
        def one_run(base):
            config = make_workspace(
                base, [REPORT_ARTIFACT],
                policy={"default": "allow", "values": {"manager_email": "m@x.com"}},
                pdb_values={"name": "Sam"},
                qllm_answers=["no"],
                annotations=REPORT_ANNOTATIONS,
            )
            seed_report_file(base)
            _, task_dir = run_workspace(config)
            lines = (task_dir / "transcript.jsonl").read_text().splitlines()
            events = [json.loads(line) for line in lines]
            for event in events:
                event.pop("ts", None)
                event.get("payload", {}).pop("ts", None)
            return json.dumps(events, sort_keys=True)

        assert one_run(tmp_path / "a") == one_run(tmp_path / "b")


class TestSystemPrompt:
    def test_contains_every_key_and_no_value(self, tmp_path):
        config = make_workspace(
            tmp_path, ["x = 1"],
            pdb_values={"ssn": "078-05-1120", "phone": "555-0173", "name": "Sam Park"},
        )
        runtime = build_runtime(load_config(config))
        prompt = system_prompt_for(runtime)
        for key in ("ssn", "phone", "name"):
            assert key in prompt
        for value in ("078-05-1120", "555-0173", "Sam Park"):
            assert value not in prompt

    def test_lists_tools(self, tmp_path):
        config = make_workspace(tmp_path, ["x = 1"])
        runtime = build_runtime(load_config(config))
        prompt = system_prompt_for(runtime)
        assert "send_email" in prompt
        assert "read_file" in prompt
        assert "multishot" in prompt


class TestCli:
    def _workspace(self, tmp_path, policy=None, artifacts=None, **kwargs):
        return make_workspace(
            tmp_path,
            artifacts or ["x = 1"],
            policy=policy or {"default": "allow"},
            **kwargs,
        )

    def _prompt(self, tmp_path):
        prompt = tmp_path / "prompt.txt"
        prompt.write_text("do the thing")
        return str(prompt)

    def test_run_exit_zero(self, tmp_path, capsys):
        config = self._workspace(tmp_path)
        code = main(["run", "--prompt", self._prompt(tmp_path), "--config", str(config)])
        assert code == EXIT_COMPLETED
        assert json.loads(capsys.readouterr().out)["status"] == "completed"

    def test_run_exit_two_on_denial(self, tmp_path):
        config = self._workspace(
            tmp_path,
            policy={"default": "deny"},
            artifacts=[
                's = priv_data_db.get("k")\n'
                'sink = mcp_helper.connect("sink")\n'
                'sink.process_query("put", args={"a": s})\n'
            ],
            pdb_values={"k": "v"},
        )
        code = main(["run", "--prompt", self._prompt(tmp_path), "--config", str(config)])
        assert code == EXIT_DENIED

    def test_run_exit_three_on_fault(self, tmp_path):
        config = self._workspace(tmp_path, artifacts=["x = 1 / 0"])
        code = main(["run", "--prompt", self._prompt(tmp_path), "--config", str(config)])
        assert code == EXIT_FAULT

    def test_run_exit_four_on_config_error(self, tmp_path):
        missing = tmp_path / "nope.json"
        code = main(["run", "--prompt", self._prompt(tmp_path), "--config", str(missing)])
        assert code == EXIT_CONFIG

    def test_usage_error_is_64(self):
        assert main(["run"]) == EXIT_USAGE
        assert main(["frobnicate"]) == EXIT_USAGE

    def test_pdb_list_masks_values(self, tmp_path, capsys):
        config = self._workspace(tmp_path, pdb_values={"ssn": "078-05-1120"})
        assert main(["pdb", "list", "--config", str(config)]) == EXIT_COMPLETED
        output = capsys.readouterr().out
        assert "ssn" in output and "078-05-1120" not in output

    def test_pdb_set_and_delete(self, tmp_path, capsys):
        config = self._workspace(tmp_path)
        assert main(["pdb", "set", "--config", str(config),
                     "--key", "dob", "--value", "1/1/2000"]) == EXIT_COMPLETED
        assert "1/1/2000" not in capsys.readouterr().out
        assert main(["pdb", "delete", "--config", str(config), "--key", "dob"]) == EXIT_COMPLETED

    def test_log_export(self, tmp_path, capsys):
        artifacts = [
            's = priv_data_db.get("k")\n'
            'sink = mcp_helper.connect("sink")\n'
            'sink.process_query("put", args={"a": s})\n'
        ]
        config = self._workspace(tmp_path, artifacts=artifacts, pdb_values={"k": "v"})
        main(["run", "--prompt", self._prompt(tmp_path), "--config", str(config)])
        capsys.readouterr()
        assert main(["log", "export", "--config", str(config)]) == EXIT_COMPLETED
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 1
        record = json.loads(lines[0])
        assert record["item"] == "pdb:k"
        assert record["entity"] == "sink"

    def test_revoke_then_rerun_prompts_once_more(self, tmp_path, capsys):
        artifacts = [
            's = priv_data_db.get("ssn")\n'
            'email = mcp_helper.connect("email")\n'
            'email.process_query("send_email", args={"to": "joe@example.com", "body": s})\n'
        ]
        policy = {"default": "allow"}
        config = self._workspace(tmp_path, policy=policy, artifacts=artifacts,
                                 pdb_values={"ssn": "078-05-1120"})
        prompt = self._prompt(tmp_path)

        def prompts_during_run():
            cfg = load_config(config)
            runtime = build_runtime(cfg)
            oracle = build_oracle(cfg, None)
            outcome, _ = run_task("p", runtime, oracle, build_provider(cfg))
            assert outcome.status == ExecutionOutcome.COMPLETED
            return len(oracle.consultations)

        first = prompts_during_run()
        assert first == 1
        second = prompts_during_run()
        assert second == 0  # permission persisted
        assert main(["permissions", "revoke", "--config", str(config),
                     "--item", "pdb:ssn", "--entity", "joe@example.com"]) == EXIT_COMPLETED
        third = prompts_during_run()
        assert third == 1  # exactly one new prompt after revocation

    def test_permissions_list(self, tmp_path, capsys):
        artifacts = [
            's = priv_data_db.get("k")\n'
            'sink = mcp_helper.connect("sink")\n'
            'sink.process_query("put", args={"a": s})\n'
        ]
        config = self._workspace(tmp_path, artifacts=artifacts, pdb_values={"k": "v"})
        main(["run", "--prompt", self._prompt(tmp_path), "--config", str(config)])
        capsys.readouterr()
        assert main(["permissions", "list", "--config", str(config)]) == EXIT_COMPLETED
        out = capsys.readouterr().out
        assert re.search(r"allow\tpdb:k\tsink", out)


class TestServersJsonAnnotationFiles:
    def test_annotation_file_entry_overrides_directory(self, tmp_path):
        config = make_workspace(tmp_path, ["x = 1"], annotations=None)
        # point the email server at a dedicated annotation file
        annotation = {
            "server": "email",
            "entity_rule": {
                "kind": "arg_selector",
                "selectors": {"send_email": "args.to"},
                "transform": "lowercase_trim",
                "identity_is_public": True,
            },
        }
        (tmp_path / "email-annotation.json").write_text(json.dumps(annotation))
        servers = json.loads((tmp_path / "servers.json").read_text())
        for entry in servers["servers"]:
            if entry["name"] == "email":
                entry["annotation_file"] = "email-annotation.json"
        (tmp_path / "servers.json").write_text(json.dumps(servers))
        runtime = build_runtime(load_config(config))
        resolved = runtime.annotations.resolve_entity(
            "email", "send_email", {"to": "A@B.C "}
        )
        assert resolved.entity == "a@b.c"
