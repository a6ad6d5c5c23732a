"""Task pipeline: wire stores and servers, run the session, archive results.

Each task leaves a directory containing the verbatim artifact per shot
(``artifact-<n>.as``), the transcript (``transcript.jsonl``), and the
serialized outcome (``outcome.json``, descriptors only). The user prompt is
treated as public and reaches the provider byte-for-byte.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from ..annotations import AnnotationRegistry, load_annotation_file, load_registry
from ..broker.client import Broker, load_servers_config
from ..disclosure import DisclosureLog
from ..interp import ExecutionContext, ExecutionOutcome, Services, run_session
from ..permissions import PermissionDB
from ..private_data import PrivateDataDB
from ..transcript import Transcript
from .config import ConfigError, SessionConfig
from .hub import ConsoleHub, RemoteConsoleOracle
from .oracles import InteractiveCliOracle, scripted_oracle
from .providers import ExternalProvider, ScriptedProvider
from .sysprompt import render_system_prompt


@dataclass
class Runtime:
    """Shared stores and tool connectivity behind one config."""

    config: SessionConfig
    pdb: PrivateDataDB
    permissions: PermissionDB
    disclosures: DisclosureLog
    annotations: AnnotationRegistry
    broker: Broker


def build_runtime(cfg: SessionConfig) -> Runtime:
    cfg.store_dir.mkdir(parents=True, exist_ok=True)
    cfg.sandbox_dir.mkdir(parents=True, exist_ok=True)
    try:
        servers = load_servers_config(cfg.servers_file)
    except FileNotFoundError:
        raise ConfigError(f"servers file not found: {cfg.servers_file}") from None

    registry = load_registry(cfg.annotations_dir)
    # Per-server annotation files named in servers.json override the
    # directory-wide registry for their server.
    extra = {}
    for server in servers.values():
        if server.annotation_file:
            path = (cfg.servers_file.parent / server.annotation_file).resolve()
            annotation = load_annotation_file(path)
            extra[annotation.server] = annotation
    if extra:
        registry = registry.with_overrides(extra)

    return Runtime(
        config=cfg,
        pdb=PrivateDataDB(cfg.store_dir / "pdb.jsonl"),
        permissions=PermissionDB(cfg.store_dir / "permissions.jsonl"),
        disclosures=DisclosureLog(cfg.store_dir / "disclosures.jsonl"),
        annotations=registry,
        broker=Broker(servers, sandbox_dir=cfg.sandbox_dir),
    )


def build_provider(cfg: SessionConfig):
    spec = cfg.provider
    if spec["kind"] == "scripted":
        artifacts = []
        for entry in spec["artifacts"]:
            path = (cfg.base_dir / entry).resolve()
            if path.exists():
                artifacts.append(path.read_text(encoding="utf-8"))
            else:
                artifacts.append(entry)  # inline artifact text
        return ScriptedProvider(artifacts, list(spec.get("qllm_answers", [])))
    if spec["kind"] == "external":
        endpoint = spec.get("endpoint")
        model = spec.get("model", "")
        if not endpoint:
            raise ConfigError("external provider needs an endpoint")
        return ExternalProvider(endpoint, model)
    raise ConfigError(f"unknown provider kind {spec['kind']!r}")


def build_oracle(cfg: SessionConfig, hub: Optional[ConsoleHub]):
    spec = cfg.oracle
    if spec["kind"] == "scripted":
        policy_file = spec.get("file")
        if not policy_file:
            raise ConfigError("scripted oracle needs a policy file")
        return scripted_oracle((cfg.base_dir / policy_file).resolve())
    if spec["kind"] == "console":
        if hub is None:
            raise ConfigError("console oracle needs the control API running")
        return RemoteConsoleOracle(hub, timeout=spec.get("timeout"))
    return InteractiveCliOracle()


def system_prompt_for(runtime: Runtime) -> str:
    server_tools = {}
    for name in runtime.broker.configs:
        connection = runtime.broker.connect(name)
        server_tools[name] = list(connection.tools.values())
    return render_system_prompt(runtime.pdb.list_keys(), server_tools)


def run_task(
    prompt: str,
    runtime: Runtime,
    oracle,
    provider,
    task_id: Optional[str] = None,
    hub: Optional[ConsoleHub] = None,
) -> tuple[ExecutionOutcome, Path]:
    cfg = runtime.config
    task_id = task_id or f"task-{int(time.time() * 1000):x}"
    task_dir = cfg.tasks_dir / task_id
    task_dir.mkdir(parents=True, exist_ok=True)

    transcript = Transcript()
    if hub is not None:
        transcript.add_sink(hub.transcript_sink)

    services = Services(
        pdb=runtime.pdb,
        permissions=runtime.permissions,
        disclosures=runtime.disclosures,
        annotations=runtime.annotations,
        broker=runtime.broker,
        oracle=oracle,
        provider=provider,
        isa_enabled=cfg.isa_enabled,
    )
    ctx = ExecutionContext(
        services=services,
        session_id=task_id,
        transcript=transcript,
        shot_limit=cfg.shot_limit,
    )

    system_prompt = system_prompt_for(runtime)
    (task_dir / "system_prompt.txt").write_text(system_prompt, encoding="utf-8")
    (task_dir / "prompt.txt").write_text(prompt, encoding="utf-8")

    def archive(shot: int, source: str) -> None:
        (task_dir / f"artifact-{shot}.as").write_text(source, encoding="utf-8")

    if hub is not None:
        hub.publish({"type": "session", "status": "started", "task_id": task_id})
    outcome = run_session(prompt, system_prompt, ctx, artifact_sink=archive)
    transcript.write_jsonl(task_dir / "transcript.jsonl")
    (task_dir / "outcome.json").write_text(
        json.dumps(outcome.public_json(), indent=2, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
    if hub is not None:
        hub.publish({
            "type": "session",
            "status": "finished",
            "task_id": task_id,
            "outcome": outcome.public_json(),
        })
    return outcome, task_dir
