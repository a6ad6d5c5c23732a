"""AST node definitions for AgentScript.

AgentScript is the closed mini-language in which agent code artifacts are
written. The node set below is the whole grammar: four statement kinds, a
small expression algebra, and no user-defined functions, imports, or
exception handling. Nodes are immutable; structural equality ignores source
spans (spans compare as equal so round-trip checks can use ``==``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Union

# (line, column, end_line, end_column), 1-based lines and columns.
Span = tuple[int, int, int, int]

_NO_SPAN: Span = (0, 0, 0, 0)


@dataclass(frozen=True)
class Node:
    span: Span = field(default=_NO_SPAN, compare=False, kw_only=True, repr=False)


# ---------------------------------------------------------------------------
# Expressions


@dataclass(frozen=True)
class StrLit(Node):
    value: str = ""


@dataclass(frozen=True)
class InterpStr(Node):
    """Interpolated string: parts alternate literal text and embedded exprs.

    Normal form: at least one embedded expression, literal parts non-empty,
    and no two adjacent literal parts.
    """

    parts: tuple[Union[str, "Expr"], ...] = ()


@dataclass(frozen=True)
class IntLit(Node):
    value: int = 0


@dataclass(frozen=True)
class FloatLit(Node):
    value: float = 0.0


@dataclass(frozen=True)
class BoolLit(Node):
    value: bool = False


@dataclass(frozen=True)
class NullLit(Node):
    pass


@dataclass(frozen=True)
class ListLit(Node):
    items: tuple["Expr", ...] = ()


@dataclass(frozen=True)
class MapLit(Node):
    """Map literal; keys are string literals only (grammar invariant)."""

    entries: tuple[tuple[str, "Expr"], ...] = ()


@dataclass(frozen=True)
class Name(Node):
    ident: str = ""


@dataclass(frozen=True)
class Index(Node):
    base: "Expr" = None  # type: ignore[assignment]
    key: "Expr" = None  # type: ignore[assignment]


@dataclass(frozen=True)
class Attr(Node):
    base: "Expr" = None  # type: ignore[assignment]
    name: str = ""


@dataclass(frozen=True)
class Call(Node):
    callee: "Expr" = None  # type: ignore[assignment]
    args: tuple["Expr", ...] = ()
    kwargs: tuple[tuple[str, "Expr"], ...] = ()


@dataclass(frozen=True)
class Unary(Node):
    op: str = ""  # "not" | "neg"
    operand: "Expr" = None  # type: ignore[assignment]


@dataclass(frozen=True)
class Binary(Node):
    op: str = ""  # + - * / % == != < <= > >= and or
    left: "Expr" = None  # type: ignore[assignment]
    right: "Expr" = None  # type: ignore[assignment]


Expr = Union[
    StrLit,
    InterpStr,
    IntLit,
    FloatLit,
    BoolLit,
    NullLit,
    ListLit,
    MapLit,
    Name,
    Index,
    Attr,
    Call,
    Unary,
    Binary,
]


# ---------------------------------------------------------------------------
# Statements


@dataclass(frozen=True)
class Assign(Node):
    target: str = ""
    value: Expr = None  # type: ignore[assignment]


@dataclass(frozen=True)
class ExprStmt(Node):
    value: Expr = None  # type: ignore[assignment]


@dataclass(frozen=True)
class If(Node):
    cond: Expr = None  # type: ignore[assignment]
    then_body: tuple["Stmt", ...] = ()
    else_body: tuple["Stmt", ...] = ()


@dataclass(frozen=True)
class For(Node):
    var: str = ""
    iterable: Expr = None  # type: ignore[assignment]
    body: tuple["Stmt", ...] = ()


Stmt = Union[Assign, ExprStmt, If, For]


@dataclass(frozen=True)
class Program(Node):
    statements: tuple[Stmt, ...] = ()

    def source_spans(self) -> dict[int, Span]:
        """Map from node identity to source span, for diagnostics."""
        return {id(node): node.span for node in walk(self)}


# Names bound in every artifact's environment before execution starts.
BUILTIN_BINDINGS = ("priv_data_db", "mcp_helper", "qllm", "multishot", "log")


def walk(node: Node) -> Iterator[Node]:
    """Yield ``node`` and every AST node beneath it, in preorder."""
    yield node
    for child in _children(node):
        yield from walk(child)


def _children(node: Node) -> Iterator[Node]:
    match node:
        case Program(statements=stmts):
            yield from stmts
        case Assign(value=v) | ExprStmt(value=v):
            yield v
        case If(cond=c, then_body=t, else_body=e):
            yield c
            yield from t
            yield from e
        case For(iterable=it, body=b):
            yield it
            yield from b
        case InterpStr(parts=parts):
            for part in parts:
                if not isinstance(part, str):
                    yield part
        case ListLit(items=items):
            yield from items
        case MapLit(entries=entries):
            for _, v in entries:
                yield v
        case Index(base=b, key=k):
            yield b
            yield k
        case Attr(base=b):
            yield b
        case Call(callee=c, args=args, kwargs=kwargs):
            yield c
            yield from args
            for _, v in kwargs:
                yield v
        case Unary(operand=o):
            yield o
        case Binary(left=l, right=r):
            yield l
            yield r
        case _:
            return
