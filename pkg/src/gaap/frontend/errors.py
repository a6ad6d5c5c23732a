"""Structured parse diagnostics for AgentScript sources."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    line: int
    column: int
    message: str

    def as_record(self) -> dict:
        return {
            "severity": self.severity,
            "line": self.line,
            "column": self.column,
            "message": self.message,
        }


class ScriptError(Exception):
    """Base for all frontend errors; always positioned."""

    def __init__(self, message: str, line: int, column: int, token: str = ""):
        location = f"{line}:{column}"
        shown = f" near {token!r}" if token else ""
        super().__init__(f"{location}: {message}{shown}")
        self.message = message
        self.line = line
        self.column = column
        self.token = token

    @property
    def diagnostic(self) -> Diagnostic:
        return Diagnostic("error", self.line, self.column, self.message)


class ScriptSyntaxError(ScriptError):
    """Malformed input: unexpected token, bad literal, bad indentation."""


class UnknownConstructError(ScriptError):
    """A recognizable construct that the grammar deliberately excludes."""

    def __init__(self, construct: str, line: int, column: int, token: str = ""):
        super().__init__(
            f"construct not in the language: {construct}", line, column, token
        )
        self.construct = construct
