"""Canonical pretty-printer for AgentScript programs.

The output is deterministic and re-parses to a structurally identical tree:
``parse(pretty_print(p)) == p`` for every valid program.
"""

from __future__ import annotations

from . import nodes as n

_INDENT = "    "

# Precedence levels, lowest binds loosest. Operands at a level must sit at
# a strictly higher level to avoid parentheses (same level on the left is
# fine for left-associative operators).
_PREC_OR = 1
_PREC_AND = 2
_PREC_NOT = 3
_PREC_CMP = 4
_PREC_ADD = 5
_PREC_MUL = 6
_PREC_UNARY = 7
_PREC_POSTFIX = 8

_BINARY_PREC = {
    "or": _PREC_OR,
    "and": _PREC_AND,
    "==": _PREC_CMP,
    "!=": _PREC_CMP,
    "<": _PREC_CMP,
    "<=": _PREC_CMP,
    ">": _PREC_CMP,
    ">=": _PREC_CMP,
    "+": _PREC_ADD,
    "-": _PREC_ADD,
    "*": _PREC_MUL,
    "/": _PREC_MUL,
    "%": _PREC_MUL,
}

_STR_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\t": "\\t", "\r": "\\r"}


def pretty_print(program: n.Program) -> str:
    lines: list[str] = []
    _print_block(program.statements, 0, lines)
    return "".join(f"{line}\n" for line in lines)


def _print_block(stmts: tuple[n.Stmt, ...], depth: int, lines: list[str]) -> None:
    pad = _INDENT * depth
    for stmt in stmts:
        match stmt:
            case n.Assign(target=target, value=value):
                lines.append(f"{pad}{target} = {_expr(value, 0)}")
            case n.ExprStmt(value=value):
                lines.append(f"{pad}{_expr(value, 0)}")
            case n.If(cond=cond, then_body=then_body, else_body=else_body):
                lines.append(f"{pad}if {_expr(cond, 0)}:")
                _print_block(then_body, depth + 1, lines)
                if else_body:
                    lines.append(f"{pad}else:")
                    _print_block(else_body, depth + 1, lines)
            case n.For(var=var, iterable=iterable, body=body):
                lines.append(f"{pad}for {var} in {_expr(iterable, 0)}:")
                _print_block(body, depth + 1, lines)


def _expr(expr: n.Expr, min_prec: int) -> str:
    text, prec = _render(expr)
    if prec < min_prec:
        return f"({text})"
    return text


def _render(expr: n.Expr) -> tuple[str, int]:
    match expr:
        case n.StrLit(value=value):
            return _quote(value), _PREC_POSTFIX
        case n.InterpStr():
            return _interp(expr), _PREC_POSTFIX
        case n.IntLit(value=value):
            return str(value), _PREC_POSTFIX
        case n.FloatLit(value=value):
            return repr(value), _PREC_POSTFIX
        case n.BoolLit(value=value):
            return ("True" if value else "False"), _PREC_POSTFIX
        case n.NullLit():
            return "None", _PREC_POSTFIX
        case n.ListLit(items=items):
            return "[" + ", ".join(_expr(i, 0) for i in items) + "]", _PREC_POSTFIX
        case n.MapLit(entries=entries):
            body = ", ".join(f"{_quote(k)}: {_expr(v, 0)}" for k, v in entries)
            return "{" + body + "}", _PREC_POSTFIX
        case n.Name(ident=ident):
            return ident, _PREC_POSTFIX
        case n.Index(base=base, key=key):
            return f"{_expr(base, _PREC_POSTFIX)}[{_expr(key, 0)}]", _PREC_POSTFIX
        case n.Attr(base=base, name=name):
            return f"{_expr(base, _PREC_POSTFIX)}.{name}", _PREC_POSTFIX
        case n.Call(callee=callee, args=args, kwargs=kwargs):
            rendered = [_expr(a, 0) for a in args]
            rendered += [f"{k}={_expr(v, 0)}" for k, v in kwargs]
            return f"{_expr(callee, _PREC_POSTFIX)}({', '.join(rendered)})", _PREC_POSTFIX
        case n.Unary(op="not", operand=operand):
            return f"not {_expr(operand, _PREC_NOT)}", _PREC_NOT
        case n.Unary(op="neg", operand=operand):
            return f"-{_expr(operand, _PREC_UNARY)}", _PREC_UNARY
        case n.Binary(op=op, left=left, right=right):
            prec = _BINARY_PREC[op]
            # Comparisons do not chain: both operands must be higher level.
            left_min = prec if op not in ("==", "!=", "<", "<=", ">", ">=") else prec + 1
            return (
                f"{_expr(left, left_min)} {op} {_expr(right, prec + 1)}",
                prec,
            )
    raise TypeError(f"unexpected node {type(expr).__name__}")


def _quote(value: str) -> str:
    out = ['"']
    for ch in value:
        if ch in _STR_ESCAPES:
            out.append(_STR_ESCAPES[ch])
        elif ord(ch) < 0x20:
            out.append(f"\\x{ord(ch):02x}")
        else:
            out.append(ch)
    out.append('"')
    return "".join(out)


def _interp(node: n.InterpStr) -> str:
    out = ['f"']
    for part in node.parts:
        if isinstance(part, str):
            for ch in part:
                if ch in _STR_ESCAPES:
                    out.append(_STR_ESCAPES[ch])
                elif ch == "{":
                    out.append("{{")
                elif ch == "}":
                    out.append("}}")
                elif ord(ch) < 0x20:
                    out.append(f"\\x{ord(ch):02x}")
                else:
                    out.append(ch)
        else:
            text = _expr(part, 0)
            head = " " if text.startswith("{") else ""
            tail = " " if text.endswith("}") else ""
            out.append("{" + head + text + tail + "}")
    out.append('"')
    return "".join(out)
