"""Session runner: the request-artifact / execute / handoff loop.

One session executes single-threaded. Each shot gets a fresh namespace;
session taints, the items-sent-to-model memory, and the transcript persist
across shots. A denied disclosure or a fault ends the session; a multishot
handoff requests the next artifact only after the gate authorized the
query's disclosure to the model provider.
"""

from __future__ import annotations

from typing import Callable, Optional

from ..canon import digest
from ..frontend import ScriptError, parse
from ..gate import DisclosurePair
from ..taint import PdbItem
from .context import ExecutionContext, ExecutionOutcome
from .interpreter import (
    DisclosureDeniedSignal,
    Interpreter,
    RuntimeFaultError,
    ShotHandoff,
    UserRejectedSignal,
    initial_env,
)

ArtifactSink = Callable[[int, str], None]


def run_session(
    user_prompt: str,
    system_prompt: str,
    ctx: ExecutionContext,
    artifact_sink: Optional[ArtifactSink] = None,
) -> ExecutionOutcome:
    provider = ctx.services.provider
    handoff_query: Optional[str] = None
    shots = 0
    while shots < ctx.shot_limit:
        shots += 1
        ctx.shot_index = shots
        try:
            source = provider.next_artifact(system_prompt, user_prompt, handoff_query, shots)
        except Exception as exc:
            return _outcome(ctx, ExecutionOutcome.FAULT, shots,
                            message=f"model provider failed ({type(exc).__name__})")
        if artifact_sink is not None:
            artifact_sink(shots, source)
        ctx.transcript.append("shot", {"shot": shots, "artifact_digest": digest(source)})
        try:
            program = parse(source)
        except ScriptError as exc:
            return _outcome(ctx, ExecutionOutcome.FAULT, shots,
                            message=f"artifact parse error: {exc}")
        ctx.env = initial_env()
        try:
            Interpreter(ctx).run_program(program)
        except ShotHandoff as handoff:
            handoff_query = handoff.query_text
            continue
        except DisclosureDeniedSignal as denial:
            return _outcome(ctx, ExecutionOutcome.DENIED, shots, pairs=denial.pairs)
        except UserRejectedSignal as rejection:
            pairs = (DisclosurePair(PdbItem(rejection.key), "user"),)
            return _outcome(ctx, ExecutionOutcome.DENIED, shots, pairs=pairs,
                            message=f"user declined to add key {rejection.key!r}")
        except RuntimeFaultError as fault:
            return _outcome(ctx, ExecutionOutcome.FAULT, shots, message=str(fault))
        return _outcome(ctx, ExecutionOutcome.COMPLETED, shots)
    return _outcome(ctx, ExecutionOutcome.FAULT, shots,
                    message=f"shot limit exceeded ({ctx.shot_limit})")


def execute_single(program_source: str, ctx: ExecutionContext) -> ExecutionOutcome:
    """Run one already-parsed-or-parsable artifact without a provider loop."""
    try:
        program = parse(program_source)
    except ScriptError as exc:
        return _outcome(ctx, ExecutionOutcome.FAULT, 1,
                        message=f"artifact parse error: {exc}")
    ctx.env = initial_env()
    try:
        Interpreter(ctx).run_program(program)
    except ShotHandoff:
        return _outcome(ctx, ExecutionOutcome.FAULT, 1,
                        message="multishot is not available in single-shot execution")
    except DisclosureDeniedSignal as denial:
        return _outcome(ctx, ExecutionOutcome.DENIED, 1, pairs=denial.pairs)
    except UserRejectedSignal as rejection:
        pairs = (DisclosurePair(PdbItem(rejection.key), "user"),)
        return _outcome(ctx, ExecutionOutcome.DENIED, 1, pairs=pairs,
                        message=f"user declined to add key {rejection.key!r}")
    except RuntimeFaultError as fault:
        return _outcome(ctx, ExecutionOutcome.FAULT, 1, message=str(fault))
    return _outcome(ctx, ExecutionOutcome.COMPLETED, 1)


def _outcome(ctx, status, shots, pairs=(), message="") -> ExecutionOutcome:
    return ExecutionOutcome(
        status=status,
        pairs=tuple(pairs),
        message=message,
        shots_executed=shots,
        transcript=ctx.transcript,
    )
