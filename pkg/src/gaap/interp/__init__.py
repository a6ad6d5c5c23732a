"""Taint-tracking interpreter and session runner."""

from .context import ExecutionContext, ExecutionOutcome, ModelProvider, Services, UserOracle
from .interpreter import (
    DisclosureDeniedSignal,
    Interpreter,
    RuntimeFaultError,
    ShotHandoff,
    UserRejectedSignal,
    coerce_reply,
    initial_env,
)
from .session import execute_single, run_session

__all__ = [
    "DisclosureDeniedSignal",
    "ExecutionContext",
    "ExecutionOutcome",
    "Interpreter",
    "ModelProvider",
    "RuntimeFaultError",
    "Services",
    "ShotHandoff",
    "UserOracle",
    "UserRejectedSignal",
    "coerce_reply",
    "execute_single",
    "initial_env",
    "run_session",
]
