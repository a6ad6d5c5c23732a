"""Recursive-descent parser for AgentScript.

Produces :class:`~gaap.frontend.nodes.Program` trees. Beyond the grammar, the
parser enforces the structural invariants of the language: map keys are
string literals, call targets are name/attribute chains, every referenced
name is a builtin binding or assigned earlier in program order, and
``priv_data_db.access_<key>()`` is rewritten to the canonical
``priv_data_db.get("<key>")`` form.
"""

from __future__ import annotations

from . import nodes as n
from .errors import ScriptSyntaxError, UnknownConstructError
from .lexer import InterpSegment, Lexer, Token

_COMPARISON_OPS = {"==", "!=", "<", "<=", ">", ">="}
_ADD_OPS = {"+", "-"}
_MUL_OPS = {"*", "/", "%"}


def parse(source: str) -> n.Program:
    """Parse AgentScript source text into a Program.

    Raises ScriptSyntaxError or UnknownConstructError; never returns a
    partial tree.
    """
    tokens = Lexer(source).tokenize()
    program = _Parser(tokens).parse_program()
    _check_names(program)
    return program


def parse_expression(source: str, line: int = 1, column: int = 1) -> n.Expr:
    """Parse a single expression (used for interpolation segments)."""
    tokens = Lexer(
        source, start_line=line, start_column=column, expression_mode=True
    ).tokenize()
    parser = _Parser(tokens)
    expr = parser.expression()
    parser.expect_kinds("NEWLINE")
    parser.expect_kinds("EOF")
    return expr


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.index = 0

    # ------------------------------------------------------------------
    # Token plumbing

    def peek(self, offset: int = 0) -> Token:
        idx = min(self.index + offset, len(self.tokens) - 1)
        return self.tokens[idx]

    def advance(self) -> Token:
        tok = self.peek()
        if tok.kind != "EOF":
            self.index += 1
        return tok

    def at_op(self, *ops: str) -> bool:
        tok = self.peek()
        return tok.kind == "OP" and tok.value in ops

    def expect_op(self, op: str) -> Token:
        tok = self.peek()
        if tok.kind != "OP" or tok.value != op:
            raise ScriptSyntaxError(
                f"expected {op!r}", tok.line, tok.column, tok.value or tok.kind
            )
        return self.advance()

    def expect_kinds(self, *kinds: str) -> Token:
        tok = self.peek()
        if tok.kind not in kinds:
            raise ScriptSyntaxError(
                f"expected {' or '.join(k.lower() for k in kinds)}",
                tok.line,
                tok.column,
                tok.value or tok.kind,
            )
        return self.advance()

    def _fail(self, message: str) -> ScriptSyntaxError:
        tok = self.peek()
        return ScriptSyntaxError(message, tok.line, tok.column, tok.value or tok.kind)

    # ------------------------------------------------------------------
    # Statements

    def parse_program(self) -> n.Program:
        stmts: list[n.Stmt] = []
        while self.peek().kind != "EOF":
            if self.peek().kind == "NEWLINE":
                self.advance()
                continue
            if self.peek().kind == "INDENT":
                tok = self.peek()
                raise ScriptSyntaxError("unexpected indent", tok.line, tok.column)
            stmts.append(self.statement())
        return n.Program(tuple(stmts))

    def statement(self) -> n.Stmt:
        tok = self.peek()
        if tok.kind == "IF":
            return self.if_statement()
        if tok.kind == "FOR":
            return self.for_statement()
        return self.simple_statement()

    def simple_statement(self) -> n.Stmt:
        start = self.peek()
        if start.kind == "NAME" and self._peek_is_assign(1):
            name_tok = self.advance()
            self.expect_op("=")
            value = self.expression()
            self._reject_chained_assign()
            self.expect_kinds("NEWLINE")
            return n.Assign(name_tok.value, value, span=self._span(start))
        expr = self.expression()
        if self.at_op("="):
            tok = self.peek()
            raise UnknownConstructError(
                "assignment to a non-name target", tok.line, tok.column, "="
            )
        if self.at_op(","):
            tok = self.peek()
            raise UnknownConstructError(
                "tuple expression", tok.line, tok.column, ","
            )
        self.expect_kinds("NEWLINE")
        return n.ExprStmt(expr, span=self._span(start))

    def _peek_is_assign(self, offset: int) -> bool:
        tok = self.peek(offset)
        if tok.kind != "OP":
            return False
        if tok.value == "=":
            return True
        if tok.value in ("+", "-", "*", "/", "%") and self.peek(offset + 1).kind == "OP":
            nxt = self.peek(offset + 1)
            if nxt.value == "=" and nxt.column == tok.column + 1:
                raise UnknownConstructError(
                    "augmented assignment", tok.line, tok.column, tok.value + "="
                )
        return False

    def _reject_chained_assign(self) -> None:
        if self.at_op("="):
            tok = self.peek()
            raise UnknownConstructError(
                "chained assignment", tok.line, tok.column, "="
            )

    def if_statement(self) -> n.If:
        start = self.advance()  # IF
        cond = self.expression()
        self.expect_op(":")
        then_body = self.block()
        else_body: tuple[n.Stmt, ...] = ()
        if self.peek().kind == "ELSE":
            self.advance()
            self.expect_op(":")
            else_body = self.block()
        return n.If(cond, then_body, else_body, span=self._span(start))

    def for_statement(self) -> n.For:
        start = self.advance()  # FOR
        var_tok = self.expect_kinds("NAME")
        self.expect_kinds("IN")
        iterable = self.expression()
        self.expect_op(":")
        body = self.block()
        return n.For(var_tok.value, iterable, body, span=self._span(start))

    def block(self) -> tuple[n.Stmt, ...]:
        self.expect_kinds("NEWLINE")
        self.expect_kinds("INDENT")
        stmts: list[n.Stmt] = []
        while True:
            tok = self.peek()
            if tok.kind == "DEDENT":
                self.advance()
                break
            if tok.kind == "NEWLINE":
                self.advance()
                continue
            if tok.kind == "EOF":
                raise ScriptSyntaxError("unterminated block", tok.line, tok.column)
            stmts.append(self.statement())
        if not stmts:
            tok = self.peek()
            raise ScriptSyntaxError("empty block", tok.line, tok.column)
        return tuple(stmts)

    # ------------------------------------------------------------------
    # Expressions, lowest to highest precedence

    def expression(self) -> n.Expr:
        return self.or_expr()

    def or_expr(self) -> n.Expr:
        left = self.and_expr()
        while self.peek().kind == "OR":
            tok = self.advance()
            right = self.and_expr()
            left = n.Binary("or", left, right, span=self._span_tok(tok))
        return left

    def and_expr(self) -> n.Expr:
        left = self.not_expr()
        while self.peek().kind == "AND":
            tok = self.advance()
            right = self.not_expr()
            left = n.Binary("and", left, right, span=self._span_tok(tok))
        return left

    def not_expr(self) -> n.Expr:
        if self.peek().kind == "NOT":
            tok = self.advance()
            operand = self.not_expr()
            return n.Unary("not", operand, span=self._span_tok(tok))
        return self.comparison()

    def comparison(self) -> n.Expr:
        left = self.arith()
        if self.peek().kind == "OP" and self.peek().value in _COMPARISON_OPS:
            tok = self.advance()
            right = self.arith()
            nxt = self.peek()
            if nxt.kind == "OP" and nxt.value in _COMPARISON_OPS:
                raise UnknownConstructError(
                    "chained comparison", nxt.line, nxt.column, nxt.value
                )
            if nxt.kind == "IN":
                raise UnknownConstructError(
                    "membership test", nxt.line, nxt.column, "in"
                )
            return n.Binary(tok.value, left, right, span=self._span_tok(tok))
        if self.peek().kind == "IN":
            tok = self.peek()
            raise UnknownConstructError("membership test", tok.line, tok.column, "in")
        return left

    def arith(self) -> n.Expr:
        left = self.term()
        while self.at_op(*_ADD_OPS):
            tok = self.advance()
            right = self.term()
            left = n.Binary(tok.value, left, right, span=self._span_tok(tok))
        return left

    def term(self) -> n.Expr:
        left = self.unary()
        while self.at_op(*_MUL_OPS):
            tok = self.advance()
            right = self.unary()
            left = n.Binary(tok.value, left, right, span=self._span_tok(tok))
        return left

    def unary(self) -> n.Expr:
        if self.at_op("-"):
            tok = self.advance()
            operand = self.unary()
            return n.Unary("neg", operand, span=self._span_tok(tok))
        return self.postfix()

    def postfix(self) -> n.Expr:
        expr = self.primary()
        while True:
            if self.at_op("("):
                expr = self.call(expr)
            elif self.at_op("["):
                tok = self.advance()
                key = self.expression()
                if self.at_op(":"):
                    bad = self.peek()
                    raise UnknownConstructError(
                        "slice expression", bad.line, bad.column, ":"
                    )
                self.expect_op("]")
                expr = n.Index(expr, key, span=self._span_tok(tok))
            elif self.at_op("."):
                tok = self.advance()
                name_tok = self.expect_kinds("NAME")
                expr = n.Attr(expr, name_tok.value, span=self._span_tok(tok))
            else:
                return expr

    def call(self, callee: n.Expr) -> n.Expr:
        open_tok = self.expect_op("(")
        if not isinstance(callee, (n.Name, n.Attr)):
            raise ScriptSyntaxError(
                "call target must be a name or attribute chain",
                open_tok.line,
                open_tok.column,
                "(",
            )
        args: list[n.Expr] = []
        kwargs: list[tuple[str, n.Expr]] = []
        while not self.at_op(")"):
            if self.peek().kind == "NAME" and self._is_kwarg_start():
                name_tok = self.advance()
                self.expect_op("=")
                kwargs.append((name_tok.value, self.expression()))
            else:
                if kwargs:
                    tok = self.peek()
                    raise ScriptSyntaxError(
                        "positional argument after named argument",
                        tok.line,
                        tok.column,
                        tok.value or tok.kind,
                    )
                args.append(self.expression())
            if self.at_op(","):
                self.advance()
            elif not self.at_op(")"):
                raise self._fail("expected ',' or ')'")
        self.expect_op(")")
        call = n.Call(callee, tuple(args), tuple(kwargs), span=callee.span)
        return _rewrite_access_sugar(call)

    def _is_kwarg_start(self) -> bool:
        nxt = self.peek(1)
        if nxt.kind != "OP" or nxt.value != "=":
            return False
        after = self.peek(2)
        return not (after.kind == "OP" and after.value == "=")

    def primary(self) -> n.Expr:
        tok = self.peek()
        if tok.kind == "INT":
            self.advance()
            return n.IntLit(int(tok.value), span=self._span_tok(tok))
        if tok.kind == "FLOAT":
            self.advance()
            return n.FloatLit(float(tok.value), span=self._span_tok(tok))
        if tok.kind == "BOOL":
            self.advance()
            return n.BoolLit(tok.value in ("True", "true"), span=self._span_tok(tok))
        if tok.kind == "NULL":
            self.advance()
            return n.NullLit(span=self._span_tok(tok))
        if tok.kind == "STRING":
            self.advance()
            return n.StrLit(tok.value, span=self._span_tok(tok))
        if tok.kind == "INTERP":
            self.advance()
            return self._interp_node(tok)
        if tok.kind == "NAME":
            self.advance()
            return n.Name(tok.value, span=self._span_tok(tok))
        if self.at_op("("):
            self.advance()
            expr = self.expression()
            if self.at_op(","):
                bad = self.peek()
                raise UnknownConstructError(
                    "tuple expression", bad.line, bad.column, ","
                )
            self.expect_op(")")
            return expr
        if self.at_op("["):
            return self.list_literal()
        if self.at_op("{"):
            return self.map_literal()
        raise self._fail("expected an expression")

    def list_literal(self) -> n.ListLit:
        open_tok = self.expect_op("[")
        items: list[n.Expr] = []
        while not self.at_op("]"):
            items.append(self.expression())
            if self.peek().kind == "FOR":
                tok = self.peek()
                raise UnknownConstructError(
                    "comprehension", tok.line, tok.column, "for"
                )
            if self.at_op(","):
                self.advance()
            elif not self.at_op("]"):
                raise self._fail("expected ',' or ']'")
        self.expect_op("]")
        return n.ListLit(tuple(items), span=self._span_tok(open_tok))

    def map_literal(self) -> n.MapLit:
        open_tok = self.expect_op("{")
        entries: list[tuple[str, n.Expr]] = []
        while not self.at_op("}"):
            key_tok = self.peek()
            if key_tok.kind != "STRING":
                raise ScriptSyntaxError(
                    "map keys must be string literals",
                    key_tok.line,
                    key_tok.column,
                    key_tok.value or key_tok.kind,
                )
            self.advance()
            self.expect_op(":")
            entries.append((key_tok.value, self.expression()))
            if self.at_op(","):
                self.advance()
            elif not self.at_op("}"):
                raise self._fail("expected ',' or '}'")
        self.expect_op("}")
        return n.MapLit(tuple(entries), span=self._span_tok(open_tok))

    def _interp_node(self, tok: Token) -> n.Expr:
        parts: list = []
        for part in tok.parts:
            if isinstance(part, InterpSegment):
                parts.append(parse_expression(part.text, part.line, part.column))
            else:
                parts.append(part)
        return n.InterpStr(tuple(parts), span=self._span_tok(tok))

    # ------------------------------------------------------------------

    def _span(self, tok: Token) -> n.Span:
        return (tok.line, tok.column, self.peek(-1).line, self.peek(-1).column)

    def _span_tok(self, tok: Token) -> n.Span:
        return (tok.line, tok.column, tok.line, tok.column)


def _rewrite_access_sugar(call: n.Call) -> n.Call:
    """Rewrite ``priv_data_db.access_<key>()`` to ``priv_data_db.get("<key>")``."""
    callee = call.callee
    if (
        isinstance(callee, n.Attr)
        and isinstance(callee.base, n.Name)
        and callee.base.ident == "priv_data_db"
        and callee.name.startswith("access_")
        and len(callee.name) > len("access_")
        and not call.args
        and not call.kwargs
    ):
        key = callee.name[len("access_") :]
        return n.Call(
            n.Attr(callee.base, "get", span=callee.span),
            (n.StrLit(key, span=call.span),),
            (),
            span=call.span,
        )
    return call


# ---------------------------------------------------------------------------
# Name resolution: every referenced name is a builtin or assigned earlier
# in program order. Conditional paths are checked textually; actually
# unbound names at runtime surface as runtime faults.


def _check_names(program: n.Program) -> None:
    defined: set[str] = set(n.BUILTIN_BINDINGS)

    def check_stmts(stmts: tuple[n.Stmt, ...]) -> None:
        for stmt in stmts:
            match stmt:
                case n.Assign(target=target, value=value):
                    check_expr(value)
                    defined.add(target)
                case n.ExprStmt(value=value):
                    check_expr(value)
                case n.If(cond=cond, then_body=t, else_body=e):
                    check_expr(cond)
                    check_stmts(t)
                    check_stmts(e)
                case n.For(var=var, iterable=it, body=body):
                    check_expr(it)
                    defined.add(var)
                    check_stmts(body)

    def check_expr(expr: n.Expr) -> None:
        for node in n.walk(expr):
            if isinstance(node, n.Name) and node.ident not in defined:
                line, col = node.span[0], node.span[1]
                raise ScriptSyntaxError(
                    f"name {node.ident!r} is not defined before use", line, col,
                    node.ident,
                )

    check_stmts(program.statements)
