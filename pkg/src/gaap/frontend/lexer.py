"""Hand-written lexer for AgentScript.

Indentation-based blocks like Python's: the lexer emits NEWLINE at logical
line ends and INDENT/DEDENT around nested blocks. Newlines inside brackets
are suppressed. Interpolated strings are scanned here into literal segments
and raw expression segments (with positions); the parser re-parses the
expression segments.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from .errors import ScriptSyntaxError, UnknownConstructError

KEYWORDS = {"if", "else", "for", "in", "and", "or", "not"}

# Python keywords the grammar deliberately excludes, reported by name.
EXCLUDED_KEYWORDS = {
    "def": "function definition",
    "class": "class definition",
    "import": "import",
    "from": "import",
    "while": "while loop",
    "return": "return statement",
    "lambda": "lambda",
    "try": "exception handling",
    "except": "exception handling",
    "finally": "exception handling",
    "raise": "raise statement",
    "with": "with statement",
    "yield": "yield",
    "global": "global declaration",
    "nonlocal": "nonlocal declaration",
    "del": "del statement",
    "assert": "assert statement",
    "async": "async construct",
    "await": "await",
    "pass": "pass statement",
    "elif": "elif clause",
    "break": "break statement",
    "continue": "continue statement",
    "match": "match statement",
    "is": "identity test",
}

BOOL_WORDS = {"True": True, "False": False, "true": True, "false": False}
NULL_WORDS = {"None", "null"}

_TWO_CHAR_OPS = {"==", "!=", "<=", ">="}
_ONE_CHAR_OPS = set("+-*/%<>=(),[]{}:.")

def _is_digit(ch: str) -> bool:
    return "0" <= ch <= "9"


_ESCAPES = {"n": "\n", "t": "\t", "r": "\r", '"': '"', "'": "'", "\\": "\\", "0": "\0"}


@dataclass(frozen=True)
class InterpSegment:
    """One raw expression segment of an interpolated string."""

    text: str
    line: int
    column: int


@dataclass(frozen=True)
class Token:
    kind: str
    value: str
    line: int
    column: int
    # Interpolated strings carry their decoded structure alongside the raw text.
    parts: tuple[Union[str, InterpSegment], ...] = field(default=(), compare=False)


class Lexer:
    def __init__(
        self,
        source: str,
        start_line: int = 1,
        start_column: int = 1,
        expression_mode: bool = False,
    ):
        self.source = source
        self.pos = 0
        self.line = start_line
        self.column = start_column
        self.bracket_depth = 0
        self.indents = [0]
        self.tokens: list[Token] = []
        # Expression mode lexes a single embedded expression: leading
        # whitespace is not block indentation there.
        self.expression_mode = expression_mode

    def tokenize(self) -> list[Token]:
        at_line_start = not self.expression_mode
        while True:
            if at_line_start and self.bracket_depth == 0:
                if self._handle_indentation():
                    break
                at_line_start = False
                continue
            ch = self._peek()
            if ch == "":
                break
            if ch == "\n":
                self._advance()
                if self.bracket_depth == 0:
                    self._emit("NEWLINE", "\n")
                    at_line_start = True
                continue
            if ch in " \t":
                self._advance()
                continue
            if ch == "#":
                while self._peek() not in ("", "\n"):
                    self._advance()
                continue
            if ch == "\\":
                raise ScriptSyntaxError(
                    "line continuations are not supported", self.line, self.column, "\\"
                )
            self._lex_token()
        self._flush_end()
        return self.tokens

    # ------------------------------------------------------------------
    # Line structure

    def _handle_indentation(self) -> bool:
        """Measure leading whitespace; returns True at end of input."""
        while True:
            width = 0
            start_line, start_col = self.line, self.column
            while self._peek() in (" ", "\t"):
                width = width + 1 if self._peek() == " " else (width // 8 + 1) * 8
                self._advance()
            if self._peek() == "#":
                while self._peek() not in ("", "\n"):
                    self._advance()
            if self._peek() == "\n":
                self._advance()
                continue
            if self._peek() == "":
                return True
            if width > self.indents[-1]:
                self.indents.append(width)
                self._emit_at("INDENT", "", start_line, start_col)
            else:
                while width < self.indents[-1]:
                    self.indents.pop()
                    self._emit_at("DEDENT", "", start_line, start_col)
                if width != self.indents[-1]:
                    raise ScriptSyntaxError(
                        "inconsistent dedent", start_line, start_col
                    )
            return False

    def _flush_end(self) -> None:
        if self.tokens and self.tokens[-1].kind not in ("NEWLINE", "INDENT", "DEDENT"):
            self._emit("NEWLINE", "")
        while len(self.indents) > 1:
            self.indents.pop()
            self._emit("DEDENT", "")
        self._emit("EOF", "")

    # ------------------------------------------------------------------
    # Tokens

    def _lex_token(self) -> None:
        line, col = self.line, self.column
        ch = self._peek()
        if ch.isalpha() or ch == "_":
            word = self._take_while(lambda c: c.isalnum() or c == "_")
            if word in ("f", "F") and self._peek() in ("'", '"'):
                self._lex_string(line, col, fstring=True)
                return
            if word in EXCLUDED_KEYWORDS:
                raise UnknownConstructError(EXCLUDED_KEYWORDS[word], line, col, word)
            if word in BOOL_WORDS:
                self._emit_at("BOOL", word, line, col)
            elif word in NULL_WORDS:
                self._emit_at("NULL", word, line, col)
            elif word in KEYWORDS:
                self._emit_at(word.upper(), word, line, col)
            else:
                self._emit_at("NAME", word, line, col)
            return
        if _is_digit(ch):
            self._lex_number(line, col)
            return
        if ch in ("'", '"'):
            self._lex_string(line, col, fstring=False)
            return
        two = self.source[self.pos : self.pos + 2]
        if two in _TWO_CHAR_OPS:
            self._advance()
            self._advance()
            self._emit_at("OP", two, line, col)
            return
        if ch in _ONE_CHAR_OPS:
            self._advance()
            if ch in "([{":
                self.bracket_depth += 1
            elif ch in ")]}":
                self.bracket_depth = max(0, self.bracket_depth - 1)
            self._emit_at("OP", ch, line, col)
            return
        raise ScriptSyntaxError(f"unexpected character {ch!r}", line, col, ch)

    def _lex_number(self, line: int, col: int) -> None:
        digits = self._take_while(_is_digit)
        is_float = False
        if self._peek() == "." and _is_digit(self._peek(1)):
            is_float = True
            self._advance()
            digits += "." + self._take_while(_is_digit)
        if self._peek() in ("e", "E") and (
            _is_digit(self._peek(1))
            or (self._peek(1) in ("+", "-") and _is_digit(self._peek(2)))
        ):
            is_float = True
            digits += self._advance()
            if self._peek() in "+-":
                digits += self._advance()
            digits += self._take_while(_is_digit)
        if self._peek().isalpha() or self._peek() == "_":
            raise ScriptSyntaxError(
                "malformed number", line, col, digits + self._peek()
            )
        self._emit_at("FLOAT" if is_float else "INT", digits, line, col)

    # ------------------------------------------------------------------
    # Strings

    def _lex_string(self, line: int, col: int, fstring: bool) -> None:
        quote = self._advance()
        parts: list[Union[str, InterpSegment]] = []
        literal: list[str] = []

        def flush_literal() -> None:
            if literal:
                parts.append("".join(literal))
                literal.clear()

        while True:
            ch = self._peek()
            if ch in ("", "\n"):
                raise ScriptSyntaxError("unterminated string literal", line, col)
            if ch == quote:
                self._advance()
                break
            if ch == "\\":
                self._advance()
                esc = self._peek()
                if esc == "x":
                    self._advance()
                    hex_digits = self._advance() + self._advance()
                    try:
                        literal.append(chr(int(hex_digits, 16)))
                    except ValueError:
                        raise ScriptSyntaxError(
                            f"bad \\x escape {hex_digits!r}", self.line, self.column
                        ) from None
                elif esc in _ESCAPES:
                    self._advance()
                    literal.append(_ESCAPES[esc])
                else:
                    raise ScriptSyntaxError(
                        f"unsupported escape \\{esc}", self.line, self.column
                    )
                continue
            if fstring and ch == "{":
                if self._peek(1) == "{":
                    self._advance()
                    self._advance()
                    literal.append("{")
                    continue
                self._advance()
                flush_literal()
                parts.append(self._scan_interp_expr())
                continue
            if fstring and ch == "}":
                if self._peek(1) == "}":
                    self._advance()
                    self._advance()
                    literal.append("}")
                    continue
                raise ScriptSyntaxError(
                    "single '}' in interpolated string", self.line, self.column
                )
            if not fstring and ch in "{}":
                # Plain strings keep braces as ordinary characters.
                literal.append(self._advance())
                continue
            literal.append(self._advance())

        flush_literal()
        has_expr = any(isinstance(p, InterpSegment) for p in parts)
        if has_expr:
            self._emit_at("INTERP", "", line, col, parts=tuple(parts))
        else:
            self._emit_at("STRING", "".join(literal) if not parts else parts[0], line, col)  # type: ignore[arg-type]

    def _scan_interp_expr(self) -> InterpSegment:
        """Scan a balanced ``{expr}`` region, including nested (f-)strings."""
        start_line, start_col = self.line, self.column
        chars: list[str] = []
        self._scan_balanced_expr(chars, start_line, start_col)
        self._advance()  # closing '}'
        text = "".join(chars)
        if not text.strip():
            raise ScriptSyntaxError("empty interpolation", start_line, start_col)
        return InterpSegment(text, start_line, start_col)

    def _scan_balanced_expr(self, sink: list[str], err_line: int, err_col: int) -> None:
        """Consume raw expression text up to (excluding) the closing '}'."""
        depth = 0
        while True:
            ch = self._peek()
            if ch in ("", "\n"):
                raise ScriptSyntaxError("unterminated interpolation", err_line, err_col)
            if ch.isalpha() or ch == "_":
                word = self._take_while(lambda c: c.isalnum() or c == "_")
                sink.append(word)
                if word in ("f", "F") and self._peek() in ("'", '"'):
                    self._skip_fstring_raw(sink)
                continue
            if ch in ("'", '"'):
                self._skip_plain_string_raw(sink)
                continue
            if ch in ("(", "[", "{"):
                depth += 1
            elif ch == "}" and depth == 0:
                return
            elif ch in (")", "]", "}"):
                depth -= 1
            sink.append(self._advance())

    def _skip_plain_string_raw(self, sink: list[str]) -> None:
        quote = self._advance()
        sink.append(quote)
        while True:
            ch = self._peek()
            if ch in ("", "\n"):
                raise ScriptSyntaxError(
                    "unterminated string literal", self.line, self.column
                )
            sink.append(self._advance())
            if ch == "\\":
                sink.append(self._advance())
                continue
            if ch == quote:
                return

    def _skip_fstring_raw(self, sink: list[str]) -> None:
        quote = self._advance()
        sink.append(quote)
        while True:
            ch = self._peek()
            if ch in ("", "\n"):
                raise ScriptSyntaxError(
                    "unterminated string literal", self.line, self.column
                )
            if ch == "\\":
                sink.append(self._advance())
                sink.append(self._advance())
                continue
            if ch == quote:
                sink.append(self._advance())
                return
            if ch == "{":
                sink.append(self._advance())
                if self._peek() == "{":
                    sink.append(self._advance())
                    continue
                self._scan_balanced_expr(sink, self.line, self.column)
                sink.append(self._advance())  # closing '}'
                continue
            if ch == "}":
                sink.append(self._advance())
                if self._peek() == "}":
                    sink.append(self._advance())
                continue
            sink.append(self._advance())

    # ------------------------------------------------------------------
    # Low-level helpers

    def _peek(self, offset: int = 0) -> str:
        idx = self.pos + offset
        return self.source[idx] if idx < len(self.source) else ""

    def _advance(self) -> str:
        if self.pos >= len(self.source):
            return ""
        ch = self.source[self.pos]
        self.pos += 1
        if ch == "\n":
            self.line += 1
            self.column = 1
        else:
            self.column += 1
        return ch

    def _take_while(self, pred) -> str:
        out = []
        while self._peek() and pred(self._peek()):
            out.append(self._advance())
        return "".join(out)

    def _emit(self, kind: str, value: str) -> None:
        self._emit_at(kind, value, self.line, self.column)

    def _emit_at(self, kind, value, line, col, parts=()) -> None:
        self.tokens.append(Token(kind, value, line, col, parts=parts))
