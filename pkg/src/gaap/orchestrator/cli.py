"""Command line interface.

    gaap run --prompt FILE --config FILE [--task-id ID]
    gaap permissions list|revoke --config FILE [...]
    gaap pdb list|set|delete --config FILE [...]
    gaap log export --config FILE [--entity E]
    gaap serve --config FILE [--host H] [--port P]

Exit codes: 0 completed, 2 disclosure denied, 3 runtime fault,
4 config error, 64 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from ..interp import ExecutionOutcome
from ..permissions import Decision, NotFound
from ..private_data import InvalidKey, KeyNotFound
from ..taint import PdbItem, item_from_wire, render_item
from .api import MASK, ApiServer, build_app
from .config import ConfigError, load_config
from .hub import ConsoleHub
from .oracles import OracleConfigError
from .providers import ProviderError
from .runner import build_oracle, build_provider, build_runtime, run_task

EXIT_COMPLETED = 0
EXIT_DENIED = 2
EXIT_FAULT = 3
EXIT_CONFIG = 4
EXIT_USAGE = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def _build_parser() -> _Parser:
    parser = _Parser(prog="gaap", description="Guarded agent execution environment")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one task")
    run.add_argument("--prompt", required=True, help="file holding the user prompt")
    run.add_argument("--config", required=True)
    run.add_argument("--task-id")

    perms = sub.add_parser("permissions", help="inspect or revoke permissions")
    perms_sub = perms.add_subparsers(dest="action", required=True)
    perms_list = perms_sub.add_parser("list")
    perms_list.add_argument("--config", required=True)
    perms_list.add_argument("--entity")
    perms_list.add_argument("--item")
    perms_revoke = perms_sub.add_parser("revoke")
    perms_revoke.add_argument("--config", required=True)
    perms_revoke.add_argument("--item", required=True,
                              help="item descriptor text or pdb key")
    perms_revoke.add_argument("--entity", required=True)

    pdb = sub.add_parser("pdb", help="manage private data keys")
    pdb_sub = pdb.add_subparsers(dest="action", required=True)
    pdb_list = pdb_sub.add_parser("list")
    pdb_list.add_argument("--config", required=True)
    pdb_set = pdb_sub.add_parser("set")
    pdb_set.add_argument("--config", required=True)
    pdb_set.add_argument("--key", required=True)
    pdb_set.add_argument("--value", required=True)
    pdb_delete = pdb_sub.add_parser("delete")
    pdb_delete.add_argument("--config", required=True)
    pdb_delete.add_argument("--key", required=True)

    log = sub.add_parser("log", help="export the disclosure log")
    log_sub = log.add_subparsers(dest="action", required=True)
    log_export = log_sub.add_parser("export")
    log_export.add_argument("--config", required=True)
    log_export.add_argument("--entity")

    serve = sub.add_parser("serve", help="serve the control API")
    serve.add_argument("--config", required=True)
    serve.add_argument("--host")
    serve.add_argument("--port", type=int)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "permissions":
            return _cmd_permissions(args)
        if args.command == "pdb":
            return _cmd_pdb(args)
        if args.command == "log":
            return _cmd_log(args)
        if args.command == "serve":
            return _cmd_serve(args)
    except (ConfigError, OracleConfigError, ProviderError) as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG
    return EXIT_USAGE


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    prompt_path = Path(args.prompt)
    if not prompt_path.exists():
        raise ConfigError(f"prompt file not found: {prompt_path}")
    prompt = prompt_path.read_text(encoding="utf-8")

    runtime = build_runtime(cfg)
    provider = build_provider(cfg)

    hub = None
    server = None
    if cfg.oracle.get("kind") == "console":
        hub = ConsoleHub()
        server = ApiServer(build_app(runtime, hub), cfg.api.host, cfg.api.port)
        server.start()
        sys.stderr.write(f"control api on http://{cfg.api.host}:{cfg.api.port}\n")
    oracle = build_oracle(cfg, hub)

    try:
        outcome, task_dir = run_task(
            prompt, runtime, oracle, provider, task_id=args.task_id, hub=hub
        )
    finally:
        if server is not None:
            time.sleep(cfg.api.linger)
            server.stop()

    sys.stdout.write(json.dumps(outcome.public_json(), indent=2) + "\n")
    sys.stderr.write(f"task directory: {task_dir}\n")
    if outcome.status == ExecutionOutcome.COMPLETED:
        return EXIT_COMPLETED
    if outcome.status == ExecutionOutcome.DENIED:
        return EXIT_DENIED
    return EXIT_FAULT


def _parse_item(text: str):
    if text.startswith("{"):
        return item_from_wire(json.loads(text))
    if text.startswith("pdb:"):
        return PdbItem(text[len("pdb:"):])
    return PdbItem(text)


def _cmd_permissions(args) -> int:
    runtime = build_runtime(load_config(args.config))
    if args.action == "list":
        for record in runtime.permissions.list(entity=args.entity, item=args.item):
            sys.stdout.write(
                f"{record.decision.value}\t{render_item(record.item)}\t{record.entity}\n"
            )
        return EXIT_COMPLETED
    try:
        runtime.permissions.revoke(_parse_item(args.item), args.entity)
    except NotFound:
        sys.stderr.write("no such permission\n")
        return EXIT_CONFIG
    sys.stdout.write("revoked\n")
    return EXIT_COMPLETED


def _cmd_pdb(args) -> int:
    runtime = build_runtime(load_config(args.config))
    if args.action == "list":
        for key in runtime.pdb.list_keys():
            sys.stdout.write(f"{key}\t{MASK}\n")
        return EXIT_COMPLETED
    if args.action == "set":
        try:
            runtime.pdb.upsert_external(args.key, args.value)
        except InvalidKey as exc:
            sys.stderr.write(f"{exc}\n")
            return EXIT_CONFIG
        sys.stdout.write(f"{args.key}\t{MASK}\n")
        return EXIT_COMPLETED
    try:
        runtime.pdb.delete(args.key)
    except KeyNotFound:
        sys.stderr.write("no such key\n")
        return EXIT_CONFIG
    sys.stdout.write("deleted\n")
    return EXIT_COMPLETED


def _cmd_log(args) -> int:
    runtime = build_runtime(load_config(args.config))
    for record in runtime.disclosures.export(entity=args.entity):
        wire = record.as_wire() | {"item": render_item(record.item)}
        sys.stdout.write(json.dumps(wire, ensure_ascii=False) + "\n")
    return EXIT_COMPLETED


def _cmd_serve(args) -> int:
    cfg = load_config(args.config)
    runtime = build_runtime(cfg)
    hub = ConsoleHub()
    host = args.host or cfg.api.host
    port = args.port if args.port is not None else cfg.api.port
    server = ApiServer(build_app(runtime, hub), host, port)
    server.start()
    sys.stderr.write(f"control api on http://{host}:{port} (ctrl-c to stop)\n")
    try:
        while True:
            time.sleep(3600)
    except KeyboardInterrupt:
        server.stop()
    return EXIT_COMPLETED


if __name__ == "__main__":
    raise SystemExit(main())
