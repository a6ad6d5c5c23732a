"""AgentScript frontend: lexer, parser, AST, and canonical printer."""

from .errors import Diagnostic, ScriptError, ScriptSyntaxError, UnknownConstructError
from .nodes import (
    Assign,
    Attr,
    Binary,
    BoolLit,
    BUILTIN_BINDINGS,
    Call,
    Expr,
    ExprStmt,
    FloatLit,
    For,
    If,
    Index,
    IntLit,
    InterpStr,
    ListLit,
    MapLit,
    Name,
    NullLit,
    Program,
    Stmt,
    StrLit,
    Unary,
    walk,
)
from .parser import parse, parse_expression
from .printer import pretty_print

__all__ = [
    "Assign",
    "Attr",
    "Binary",
    "BoolLit",
    "BUILTIN_BINDINGS",
    "Call",
    "Diagnostic",
    "Expr",
    "ExprStmt",
    "FloatLit",
    "For",
    "If",
    "Index",
    "IntLit",
    "InterpStr",
    "ListLit",
    "MapLit",
    "Name",
    "NullLit",
    "Program",
    "ScriptError",
    "ScriptSyntaxError",
    "Stmt",
    "StrLit",
    "Unary",
    "UnknownConstructError",
    "parse",
    "parse_expression",
    "pretty_print",
    "walk",
]
