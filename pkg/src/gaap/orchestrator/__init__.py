"""Session orchestration: config, prompts, oracles, providers, API, CLI."""

from .config import ConfigError, SessionConfig, load_config
from .hub import ConsoleHub, RemoteConsoleOracle
from .oracles import (
    InteractiveCliOracle,
    OracleConfigError,
    ScriptedPolicyOracle,
    allow_all_oracle,
    deny_all_oracle,
    scripted_oracle,
)
from .providers import ExternalProvider, ProviderError, ScriptedProvider
from .runner import Runtime, build_oracle, build_provider, build_runtime, run_task, system_prompt_for
from .sysprompt import render_system_prompt

__all__ = [
    "ConfigError",
    "ConsoleHub",
    "ExternalProvider",
    "InteractiveCliOracle",
    "OracleConfigError",
    "ProviderError",
    "RemoteConsoleOracle",
    "Runtime",
    "ScriptedPolicyOracle",
    "ScriptedProvider",
    "SessionConfig",
    "allow_all_oracle",
    "build_oracle",
    "build_provider",
    "build_runtime",
    "deny_all_oracle",
    "load_config",
    "render_system_prompt",
    "run_task",
    "scripted_oracle",
    "system_prompt_for",
]
