"""Session configuration loading.

``config.json`` names the stores, the servers file, the annotations
directory, the provider, and the oracle. Relative paths resolve against the
config file's directory.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class ApiConfig:
    host: str = "127.0.0.1"
    port: int = 7870
    linger: float = 1.5


@dataclass(frozen=True)
class SessionConfig:
    base_dir: Path
    store_dir: Path
    servers_file: Path
    annotations_dir: Optional[Path]
    sandbox_dir: Path
    tasks_dir: Path
    provider: dict
    oracle: dict
    shot_limit: int = 8
    isa_enabled: bool = False
    api: ApiConfig = field(default_factory=ApiConfig)


def load_config(path: str | Path) -> SessionConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from None
    base = path.parent.resolve()

    def resolve(name: str, default: Optional[str] = None) -> Optional[Path]:
        value = raw.get(name, default)
        if value is None:
            return None
        return (base / value).resolve()

    provider = raw.get("provider")
    if not isinstance(provider, dict) or "kind" not in provider:
        raise ConfigError("config needs a provider object with a kind")
    if provider["kind"] == "scripted" and not provider.get("artifacts"):
        raise ConfigError("scripted provider needs at least one artifact")
    oracle = raw.get("oracle", {"kind": "cli"})
    if not isinstance(oracle, dict) or "kind" not in oracle:
        raise ConfigError("oracle must be an object with a kind")
    if oracle["kind"] not in ("cli", "scripted", "console"):
        raise ConfigError(f"unknown oracle kind {oracle['kind']!r}")

    api_raw = raw.get("api", {})
    api = ApiConfig(
        host=api_raw.get("host", "127.0.0.1"),
        port=int(api_raw.get("port", 7870)),
        linger=float(api_raw.get("linger", 1.5)),
    )
    shot_limit = int(raw.get("shot_limit", 8))
    if shot_limit < 1:
        raise ConfigError("shot_limit must be at least 1")

    servers_file = resolve("servers")
    if servers_file is None:
        raise ConfigError("config needs a servers file path")

    return SessionConfig(
        base_dir=base,
        store_dir=resolve("store_dir", "stores"),
        servers_file=servers_file,
        annotations_dir=resolve("annotations_dir"),
        sandbox_dir=resolve("sandbox_dir", "sandbox"),
        tasks_dir=resolve("tasks_dir", "tasks"),
        provider=provider,
        oracle=oracle,
        shot_limit=shot_limit,
        isa_enabled=bool(raw.get("isa_enabled", False)),
        api=api,
    )
