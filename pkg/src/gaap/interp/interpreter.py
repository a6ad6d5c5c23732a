"""Tree-walking interpreter with dynamic taint tracking.

Every value carries the set of provenance labels that influenced it; control
flow taints (branch and loop conditions, short-circuit guards) are tracked
on a pc stack and joined into every evaluation, assignment, and disclosure.
External effects run through the policy gate; a denied disclosure aborts the
session rather than raising a catchable error, so artifacts cannot probe the
policy. Fault messages carry spans and type names, never runtime values.
"""

from __future__ import annotations

from typing import Optional

from ..annotations import EntityUnresolvable, ResolvedEntity
from ..broker.client import BrokerError, SchemaViolation, ToolError, UnknownServer
from ..broker.transport import TransportError
from ..broker.wire import ProtocolError
from ..canon import digest
from ..frontend import nodes as n
from ..gate import Authorized, Blocked, DisclosurePair, PendingCall
from ..private_data import InvalidKey, KeyNotFound
from ..taint import (
    EMPTY_TAINTS,
    MODEL_SESSION,
    PdbItem,
    TaintedValue,
    untainted,
)
from .context import ExecutionContext, QLLM_RETURN_TYPES
from .values import (
    BoundMethod,
    BuiltinFn,
    LlmHandle,
    McpHelper,
    PdbHandle,
    ServerHandle,
    is_handle,
    to_text,
    value_type_name,
)

MODEL_PROVIDER_ENTITY = "model-provider"
LLM_EXTENSION_SERVER = "llm_extension"
LLM_SERVER_LABEL = "llm"


# ---------------------------------------------------------------------------
# Control-flow signals


class RuntimeFaultError(Exception):
    """Execution fault; message is value-free (spans and type names only)."""

    def __init__(self, message: str, span: n.Span = (0, 0, 0, 0)):
        if span and span[0]:
            message = f"{message} (at line {span[0]}, column {span[1]})"
        super().__init__(message)
        self.span = span


class DisclosureDeniedSignal(Exception):
    def __init__(self, pairs: tuple[DisclosurePair, ...]):
        super().__init__("disclosure denied")
        self.pairs = pairs


class UserRejectedSignal(Exception):
    def __init__(self, key: str):
        super().__init__(f"user rejected adding private data key {key!r}")
        self.key = key


class ShotHandoff(Exception):
    """Raised by an authorized multishot call; ends the current artifact."""

    def __init__(self, query_text: str):
        super().__init__("multishot handoff")
        self.query_text = query_text


def initial_env() -> dict[str, TaintedValue]:
    return {
        "priv_data_db": untainted(PdbHandle()),
        "mcp_helper": untainted(McpHelper()),
        "qllm": untainted(BuiltinFn("qllm")),
        "multishot": untainted(BuiltinFn("multishot")),
        "log": untainted(BuiltinFn("log")),
    }


class Interpreter:
    def __init__(self, ctx: ExecutionContext):
        self.ctx = ctx

    # ------------------------------------------------------------------
    # Statements

    def run_program(self, program: n.Program) -> None:
        for stmt in program.statements:
            self.exec_stmt(stmt)

    def exec_stmt(self, stmt: n.Stmt) -> None:
        match stmt:
            case n.Assign(target=target, value=value):
                self.ctx.env[target] = self.eval_expr(value)
            case n.ExprStmt(value=value):
                self.eval_expr(value)
            case n.If():
                self.exec_branch(stmt)
            case n.For():
                self.exec_for(stmt)

    def exec_branch(self, stmt: n.If) -> None:
        cond = self.eval_expr(stmt.cond)
        if not isinstance(cond.value, bool):
            raise RuntimeFaultError(
                f"branch condition must be bool, got {cond.type_name()}", stmt.span
            )
        body = stmt.then_body if cond.value else stmt.else_body
        self.ctx.pc_stack.append(cond.taints)
        try:
            for inner in body:
                self.exec_stmt(inner)
        finally:
            self.ctx.pc_stack.pop()

    def exec_for(self, stmt: n.For) -> None:
        iterable = self.eval_expr(stmt.iterable)
        if isinstance(iterable.value, list):
            elements = list(iterable.value)
        elif isinstance(iterable.value, dict):
            elements = [untainted(key) for key in iterable.value]
        else:
            raise RuntimeFaultError(
                f"for loop needs a list or map, got {iterable.type_name()}", stmt.span
            )
        # Iteration count and order are functions of the collection.
        self.ctx.pc_stack.append(iterable.taints)
        try:
            for element in elements:
                self.ctx.env[stmt.var] = element.with_taints(
                    iterable.taints | self.ctx.pc_taint
                )
                for inner in stmt.body:
                    self.exec_stmt(inner)
        finally:
            self.ctx.pc_stack.pop()

    # ------------------------------------------------------------------
    # Expressions

    def eval_expr(self, expr: n.Expr) -> TaintedValue:
        result = self._eval(expr)
        return result.with_taints(self.ctx.pc_taint)

    def _eval(self, expr: n.Expr) -> TaintedValue:
        match expr:
            case n.StrLit(value=v):
                return untainted(v)
            case n.IntLit(value=v):
                return untainted(v)
            case n.FloatLit(value=v):
                return untainted(v)
            case n.BoolLit(value=v):
                return untainted(v)
            case n.NullLit():
                return untainted(None)
            case n.InterpStr():
                return self._eval_interp(expr)
            case n.ListLit(items=items):
                return TaintedValue([self.eval_expr(i) for i in items], EMPTY_TAINTS)
            case n.MapLit(entries=entries):
                return TaintedValue(
                    {k: self.eval_expr(v) for k, v in entries}, EMPTY_TAINTS
                )
            case n.Name(ident=ident):
                if ident not in self.ctx.env:
                    raise RuntimeFaultError(f"name {ident!r} is not bound", expr.span)
                return self.ctx.env[ident]
            case n.Attr():
                return self._eval_attr(expr)
            case n.Index():
                return self._eval_index(expr)
            case n.Unary():
                return self._eval_unary(expr)
            case n.Binary():
                return self._eval_binary(expr)
            case n.Call():
                return self._eval_call(expr)
        raise RuntimeFaultError(f"cannot evaluate {type(expr).__name__}", expr.span)

    def _eval_interp(self, expr: n.InterpStr) -> TaintedValue:
        pieces: list[str] = []
        taints = EMPTY_TAINTS
        for part in expr.parts:
            if isinstance(part, str):
                pieces.append(part)
            else:
                value = self.eval_expr(part)
                pieces.append(to_text(value))
                taints |= value.deep_taints()
        return TaintedValue("".join(pieces), taints)

    def _eval_attr(self, expr: n.Attr) -> TaintedValue:
        base = self.eval_expr(expr.base)
        if is_handle(base.value) and not isinstance(base.value, BoundMethod):
            return TaintedValue(BoundMethod(base, expr.name), base.taints)
        raise RuntimeFaultError(
            f"no attribute access on {value_type_name(base.value)}", expr.span
        )

    def _eval_index(self, expr: n.Index) -> TaintedValue:
        base = self.eval_expr(expr.base)
        key = self.eval_expr(expr.key)
        extra = base.taints | key.taints
        if isinstance(base.value, list):
            if not isinstance(key.value, int) or isinstance(key.value, bool):
                raise RuntimeFaultError(
                    f"list index must be int, got {key.type_name()}", expr.span
                )
            if not -len(base.value) <= key.value < len(base.value):
                raise RuntimeFaultError("list index out of range", expr.span)
            return base.value[key.value].with_taints(extra)
        if isinstance(base.value, dict):
            if not isinstance(key.value, str):
                raise RuntimeFaultError(
                    f"map key must be string, got {key.type_name()}", expr.span
                )
            if key.value not in base.value:
                raise RuntimeFaultError("map key not present", expr.span)
            return base.value[key.value].with_taints(extra)
        raise RuntimeFaultError(f"cannot index {base.type_name()}", expr.span)

    def _eval_unary(self, expr: n.Unary) -> TaintedValue:
        operand = self.eval_expr(expr.operand)
        if expr.op == "not":
            if not isinstance(operand.value, bool):
                raise RuntimeFaultError(
                    f"'not' needs bool, got {operand.type_name()}", expr.span
                )
            return TaintedValue(not operand.value, operand.taints)
        if isinstance(operand.value, bool) or not isinstance(operand.value, (int, float)):
            raise RuntimeFaultError(
                f"negation needs a number, got {operand.type_name()}", expr.span
            )
        return TaintedValue(-operand.value, operand.taints)

    def _eval_binary(self, expr: n.Binary) -> TaintedValue:
        if expr.op in ("and", "or"):
            return self._eval_shortcircuit(expr)
        left = self.eval_expr(expr.left)
        right = self.eval_expr(expr.right)
        op = expr.op
        if op in ("==", "!="):
            equal = self._deep_equal(left, right)
            return TaintedValue(
                equal if op == "==" else not equal,
                left.deep_taints() | right.deep_taints(),
            )
        taints = left.taints | right.taints
        lv, rv = left.value, right.value
        if op in ("<", "<=", ">", ">="):
            if not self._comparable(lv, rv):
                raise RuntimeFaultError(
                    f"cannot order {left.type_name()} and {right.type_name()}",
                    expr.span,
                )
            table = {"<": lv < rv, "<=": lv <= rv, ">": lv > rv, ">=": lv >= rv}
            return TaintedValue(table[op], taints)
        if op == "+":
            if self._both_numbers(lv, rv):
                return TaintedValue(lv + rv, taints)
            if isinstance(lv, str) and isinstance(rv, str):
                return TaintedValue(lv + rv, taints)
            if isinstance(lv, list) and isinstance(rv, list):
                return TaintedValue(list(lv) + list(rv), taints)
        elif op in ("-", "*"):
            if self._both_numbers(lv, rv):
                return TaintedValue(lv - rv if op == "-" else lv * rv, taints)
        elif op in ("/", "%"):
            if self._both_numbers(lv, rv):
                if rv == 0:
                    raise RuntimeFaultError("division by zero", expr.span)
                return TaintedValue(lv / rv if op == "/" else lv % rv, taints)
        raise RuntimeFaultError(
            f"cannot apply {op!r} to {left.type_name()} and {right.type_name()}",
            expr.span,
        )

    def _eval_shortcircuit(self, expr: n.Binary) -> TaintedValue:
        left = self.eval_expr(expr.left)
        if not isinstance(left.value, bool):
            raise RuntimeFaultError(
                f"{expr.op!r} needs bool operands, got {left.type_name()}", expr.span
            )
        decided = (expr.op == "and" and not left.value) or (
            expr.op == "or" and left.value
        )
        if decided:
            return left
        # The right operand runs only on some left values: control dependence.
        self.ctx.pc_stack.append(left.taints)
        try:
            right = self.eval_expr(expr.right)
        finally:
            self.ctx.pc_stack.pop()
        if not isinstance(right.value, bool):
            raise RuntimeFaultError(
                f"{expr.op!r} needs bool operands, got {right.type_name()}", expr.span
            )
        return TaintedValue(right.value, left.taints | right.taints)

    @staticmethod
    def _both_numbers(lv, rv) -> bool:
        return (
            isinstance(lv, (int, float))
            and not isinstance(lv, bool)
            and isinstance(rv, (int, float))
            and not isinstance(rv, bool)
        )

    @staticmethod
    def _comparable(lv, rv) -> bool:
        if Interpreter._both_numbers(lv, rv):
            return True
        return isinstance(lv, str) and isinstance(rv, str)

    def _deep_equal(self, left: TaintedValue, right: TaintedValue) -> bool:
        lv, rv = left.value, right.value
        if is_handle(lv) or is_handle(rv):
            return lv == rv
        return left.plain() == right.plain()

    # ------------------------------------------------------------------
    # Calls

    def _eval_call(self, expr: n.Call) -> TaintedValue:
        callee = self.eval_expr(expr.callee)
        args = [self.eval_expr(a) for a in expr.args]
        kwargs = {k: self.eval_expr(v) for k, v in expr.kwargs}
        target = callee.value
        if isinstance(target, BoundMethod):
            return self._call_method(target, callee.taints, args, kwargs, expr)
        if isinstance(target, BuiltinFn):
            return self._call_builtin(target.name, callee.taints, args, kwargs, expr)
        raise RuntimeFaultError(
            f"value of type {value_type_name(target)} is not callable", expr.span
        )

    def _call_builtin(self, name, owner_taints, args, kwargs, expr) -> TaintedValue:
        if name == "log":
            value = self._one_arg("log", args, kwargs, expr)
            self.ctx.transcript.append("log", {"text": to_text(value)})
            return untainted(None)
        if name == "qllm":
            return self._qllm_call(owner_taints, args, kwargs, expr)
        if name == "multishot":
            if kwargs and (set(kwargs) != {"query"} or args):
                raise RuntimeFaultError("multishot takes one query", expr.span)
            if kwargs:
                query = kwargs["query"]
            elif len(args) == 1:
                query = args[0]
            else:
                raise RuntimeFaultError("multishot takes one query", expr.span)
            self._multishot_call(owner_taints, query, expr)
        raise RuntimeFaultError(f"unknown builtin {name!r}", expr.span)

    def _call_method(self, method, owner_taints, args, kwargs, expr) -> TaintedValue:
        owner = method.owner.value
        name = method.name
        if isinstance(owner, PdbHandle):
            if name == "get":
                return self._pdb_get(owner_taints, args, kwargs, expr)
            if name == "new_value":
                return self._pdb_new_value(owner_taints, args, kwargs, expr)
            raise RuntimeFaultError(f"priv_data_db has no method {name!r}", expr.span)
        if isinstance(owner, McpHelper):
            if name in ("connect", "mcp_server"):
                return self._connect(owner_taints, args, kwargs, expr)
            raise RuntimeFaultError(f"mcp_helper has no method {name!r}", expr.span)
        if isinstance(owner, ServerHandle):
            if name == "process_query":
                return self._process_query(owner, owner_taints, args, kwargs, expr)
            raise RuntimeFaultError(f"server handle has no method {name!r}", expr.span)
        if isinstance(owner, LlmHandle):
            if name == "process_query":
                return self._llm_process_query(owner_taints, args, kwargs, expr)
            raise RuntimeFaultError(f"llm handle has no method {name!r}", expr.span)
        raise RuntimeFaultError(
            f"no methods on {value_type_name(owner)}", expr.span
        )

    @staticmethod
    def _one_arg(name, args, kwargs, expr) -> TaintedValue:
        if len(args) != 1 or kwargs:
            raise RuntimeFaultError(f"{name} takes exactly one argument", expr.span)
        return args[0]

    def _string_arg(self, name, value: TaintedValue, expr) -> str:
        if not isinstance(value.value, str):
            raise RuntimeFaultError(
                f"{name} must be a string, got {value.type_name()}", expr.span
            )
        return value.value

    # ------------------------------------------------------------------
    # Private data access

    def _pdb_get(self, owner_taints, args, kwargs, expr) -> TaintedValue:
        key_value = self._one_arg("priv_data_db.get", args, kwargs, expr)
        key = self._string_arg("private data key", key_value, expr)
        try:
            value = self.ctx.services.pdb.get(key)
        except KeyNotFound:
            raise RuntimeFaultError(
                f"no private data stored under key {key!r}", expr.span
            ) from None
        return value.with_taints(owner_taints | key_value.taints)

    def _pdb_new_value(self, owner_taints, args, kwargs, expr) -> TaintedValue:
        key_value = self._one_arg("priv_data_db.new_value", args, kwargs, expr)
        key = self._string_arg("private data key", key_value, expr)
        services = self.ctx.services
        if services.pdb.has(key):
            return services.pdb.get(key).with_taints(owner_taints | key_value.taints)
        try:
            value, origin = self._obtain_new_value(key)
        except InvalidKey:
            raise RuntimeFaultError(f"invalid private data key {key!r}", expr.span) from None
        if value is None:
            raise UserRejectedSignal(key)
        services.pdb.upsert_external(key, value, origin)
        self.ctx.transcript.append("log", {"text": f"stored new private data key {key!r}"})
        return services.pdb.get(key).with_taints(owner_taints | key_value.taints)

    def _obtain_new_value(self, key: str) -> tuple[Optional[str], str]:
        services = self.ctx.services
        if services.isa_enabled:
            found = services.isa.find(key)
            if found is not None and services.oracle.confirm_isa_value(key, found):
                return found, "user_confirmed_isa"
        return services.oracle.supply_value(key), "user_entered"

    # ------------------------------------------------------------------
    # Tool calls

    def _connect(self, owner_taints, args, kwargs, expr) -> TaintedValue:
        name_value = self._one_arg("mcp_helper.connect", args, kwargs, expr)
        name = self._string_arg("server name", name_value, expr)
        taints = owner_taints | name_value.taints
        if name == LLM_EXTENSION_SERVER:
            return TaintedValue(LlmHandle(), taints)
        try:
            self.ctx.services.broker.connect(name)
        except UnknownServer:
            raise RuntimeFaultError(f"unknown server {name!r}", expr.span) from None
        except (TransportError, ProtocolError, BrokerError) as exc:
            raise RuntimeFaultError(
                f"cannot connect to server {name!r}: {type(exc).__name__}", expr.span
            ) from None
        return TaintedValue(ServerHandle(name), taints)

    def _process_query(self, handle, owner_taints, args, kwargs, expr) -> TaintedValue:
        tool_value, args_value = self._query_args("process_query", args, kwargs, expr)
        tool = self._string_arg("tool name", tool_value, expr)
        flow_taints = owner_taints | tool_value.taints | args_value.taints
        call_args = self._args_map(args_value, expr)
        return self._tool_call(handle.server, tool, call_args, flow_taints, expr)

    def _query_args(self, name, args, kwargs, expr):
        args_value = kwargs.pop("args", None)
        if kwargs:
            extra = ", ".join(sorted(kwargs))
            raise RuntimeFaultError(f"{name} got unexpected arguments: {extra}", expr.span)
        if args_value is None and len(args) == 2:
            tool_value, args_value = args
        elif args_value is not None and len(args) == 1:
            tool_value = args[0]
        elif len(args) == 1:
            tool_value, args_value = args[0], untainted({})
        else:
            raise RuntimeFaultError(
                f"{name} takes a tool name and an args map", expr.span
            )
        return tool_value, args_value

    def _args_map(self, args_value: TaintedValue, expr) -> dict[str, TaintedValue]:
        if not isinstance(args_value.value, dict):
            raise RuntimeFaultError(
                f"args must be a map, got {args_value.type_name()}", expr.span
            )
        # Container taints flow into every argument.
        return {
            key: value.with_taints(args_value.taints)
            for key, value in args_value.value.items()
        }

    def _plain_args(self, call_args: dict[str, TaintedValue], expr) -> dict:
        plain: dict = {}
        for key, value in call_args.items():
            if _contains_handle(value):
                raise RuntimeFaultError(
                    f"tool argument {key!r} is not a data value", expr.span
                )
            plain[key] = value.plain()
        return plain

    def _tool_call(self, server, tool, call_args, flow_taints, expr) -> TaintedValue:
        ctx = self.ctx
        plain_args = self._plain_args(call_args, expr)
        try:
            entity = ctx.services.annotations.resolve_entity(server, tool, plain_args)
        except EntityUnresolvable as exc:
            raise RuntimeFaultError(
                f"call blocked, entity unresolvable: {exc.server}.{exc.tool}", expr.span
            ) from None
        call = PendingCall(
            server=server,
            tool=tool,
            entity=entity,
            args=call_args,
            pc_taints=ctx.pc_taint | flow_taints,
            session_taints=ctx.session_taints,
            model_items=ctx.items_sent_to_model,
            session_id=ctx.session_id,
            shot_index=ctx.shot_index,
        )
        outcome = ctx.gate.authorize(call)
        if isinstance(outcome, Blocked):
            raise DisclosureDeniedSignal(outcome.pairs)
        assert isinstance(outcome, Authorized)
        try:
            connection = ctx.services.broker.connect(server)
            raw = connection.call(tool, plain_args, outcome)
        except ToolError as exc:
            self._call_event(call, outcome, ok=False, error=exc.code)
            raise RuntimeFaultError(
                f"tool call failed: {server}.{tool} ({exc.code})", expr.span
            ) from None
        except (ProtocolError, TransportError, SchemaViolation, BrokerError) as exc:
            self._call_event(call, outcome, ok=False, error=type(exc).__name__)
            raise RuntimeFaultError(
                f"tool call failed: {server}.{tool} ({type(exc).__name__})", expr.span
            ) from None
        self._call_event(call, outcome, ok=True, result=raw)
        return ctx.gate.taint_output(call, raw)

    def _call_event(self, call: PendingCall, authorized: Authorized, ok: bool,
                    result=None, error: str = "") -> None:
        plain_args = {k: v.plain() for k, v in call.args.items()}
        self.ctx.transcript.append("call", {
            "server": call.server,
            "tool": call.tool,
            "entity": call.entity.entity,
            "args": plain_args,
            "args_digest": authorized.args_digest,
            "items": [p.as_wire() for p in authorized.pairs],
            "disclosure_seqs": list(authorized.disclosure_seqs),
            "ok": ok,
            "error": error,
            "result_digest": digest(result) if ok else "",
            "shot": call.shot_index,
        })

    # ------------------------------------------------------------------
    # Model-facing calls

    def _llm_process_query(self, owner_taints, args, kwargs, expr) -> TaintedValue:
        tool_value, args_value = self._query_args("process_query", args, kwargs, expr)
        tool = self._string_arg("tool name", tool_value, expr)
        flow = owner_taints | tool_value.taints | args_value.taints
        call_args = self._args_map(args_value, expr)
        if tool == "qllm_call":
            return self._qllm_from_map(flow, call_args, expr)
        if tool == "multishot_call":
            query = call_args.get("query")
            if query is None:
                raise RuntimeFaultError("multishot_call needs a query", expr.span)
            self._multishot_call(flow, query, expr)
        raise RuntimeFaultError(
            f"llm extension has no tool {tool!r}", expr.span
        )

    def _qllm_call(self, owner_taints, args, kwargs, expr) -> TaintedValue:
        if args:
            raise RuntimeFaultError(
                "qllm takes named arguments: prompt, return_type, data", expr.span
            )
        return self._qllm_from_map(owner_taints, dict(kwargs), expr)

    def _qllm_from_map(self, flow_taints, call_args, expr) -> TaintedValue:
        ctx = self.ctx
        unexpected = set(call_args) - {"prompt", "return_type", "data"}
        if unexpected:
            raise RuntimeFaultError(
                f"qllm got unexpected arguments: {', '.join(sorted(unexpected))}",
                expr.span,
            )
        prompt = call_args.get("prompt")
        if prompt is None:
            raise RuntimeFaultError("qllm needs a prompt", expr.span)
        prompt_text = self._string_arg("qllm prompt", prompt, expr)
        return_type_value = call_args.get("return_type", untainted("string"))
        return_type = self._string_arg("qllm return_type", return_type_value, expr)
        if return_type not in QLLM_RETURN_TYPES:
            raise RuntimeFaultError(
                f"qllm return_type must be one of {', '.join(QLLM_RETURN_TYPES)}",
                expr.span,
            )
        data = call_args.get("data")
        if data is not None and _contains_handle(data):
            raise RuntimeFaultError("qllm data is not a data value", expr.span)
        data_text = to_text(data) if data is not None else None
        input_taints = prompt.deep_taints() | (
            data.deep_taints() if data is not None else EMPTY_TAINTS
        )

        call = PendingCall(
            server=LLM_SERVER_LABEL,
            tool="qllm_call",
            entity=ResolvedEntity(MODEL_PROVIDER_ENTITY),
            args={k: v for k, v in call_args.items()},
            pc_taints=ctx.pc_taint | flow_taints,
            session_taints=ctx.session_taints,
            model_items=ctx.items_sent_to_model,
            session_id=ctx.session_id,
            shot_index=ctx.shot_index,
        )
        outcome = ctx.gate.authorize(call)
        if isinstance(outcome, Blocked):
            raise DisclosureDeniedSignal(outcome.pairs)
        assert isinstance(outcome, Authorized)
        ctx.note_model_items(p.item for p in outcome.pairs)
        try:
            reply = ctx.services.provider.qllm(prompt_text, data_text, return_type)
        except Exception as exc:
            self._call_event(call, outcome, ok=False, error=type(exc).__name__)
            raise RuntimeFaultError(
                f"model provider failed ({type(exc).__name__})", expr.span
            ) from None
        value = coerce_reply(reply, return_type, expr)
        self._call_event(call, outcome, ok=True, result={"return_type": return_type})
        # The quarantined model call passes its input taints to its output.
        return TaintedValue(value, input_taints)

    def _multishot_call(self, flow_taints, query: TaintedValue, expr) -> None:
        ctx = self.ctx
        query_text = self._string_arg("multishot query", query, expr)
        call = PendingCall(
            server=LLM_SERVER_LABEL,
            tool="multishot_call",
            entity=ResolvedEntity(MODEL_PROVIDER_ENTITY),
            args={"query": query},
            pc_taints=ctx.pc_taint | flow_taints,
            session_taints=ctx.session_taints,
            model_items=ctx.items_sent_to_model,
            session_id=ctx.session_id,
            shot_index=ctx.shot_index,
        )
        outcome = ctx.gate.authorize(call)
        if isinstance(outcome, Blocked):
            raise DisclosureDeniedSignal(outcome.pairs)
        assert isinstance(outcome, Authorized)
        ctx.note_model_items(p.item for p in outcome.pairs)
        # Future shots may encode anything the provider has seen.
        ctx.session_taints = (
            ctx.session_taints | query.deep_taints() | frozenset({MODEL_SESSION})
        )
        self._call_event(call, outcome, ok=True, result={"handoff": True})
        raise ShotHandoff(query_text)


def coerce_reply(reply: str, return_type: str, expr) -> object:
    """Fixed coercion table from provider text to a typed value."""
    text = reply.strip()
    if return_type == "string":
        return reply
    if return_type == "bool":
        lowered = text.lower()
        if lowered in ("true", "yes", "y", "1"):
            return True
        if lowered in ("false", "no", "n", "0"):
            return False
        raise RuntimeFaultError("cannot coerce provider reply to bool", expr.span)
    try:
        if return_type == "int":
            return int(text)
        return float(text)
    except ValueError:
        raise RuntimeFaultError(
            f"cannot coerce provider reply to {return_type}", expr.span
        ) from None


def _contains_handle(value: TaintedValue) -> bool:
    if is_handle(value.value):
        return True
    if isinstance(value.value, list):
        return any(_contains_handle(v) for v in value.value)
    if isinstance(value.value, dict):
        return any(_contains_handle(v) for v in value.value.values())
    return False
