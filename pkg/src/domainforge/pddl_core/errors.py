"""Exceptions and diagnostics for PDDL processing."""

from __future__ import annotations

from dataclasses import dataclass


class PddlError(Exception):
    """Base class for every error raised by the PDDL toolchain."""


class PddlSyntaxError(PddlError):
    """Malformed PDDL text; carries the source position and what was expected."""

    def __init__(self, message: str, line: int = 0, col: int = 0, expected: str | None = None):
        self.line = line
        self.col = col
        self.expected = expected
        detail = f"{message} at {line}:{col}"
        if expected:
            detail += f" (expected {expected})"
        super().__init__(detail)


class UnsupportedFeature(PddlError):
    """A requirement flag or section outside the supported STRIPS subset."""

    def __init__(self, flag: str, line: int = 0, col: int = 0):
        self.flag = flag
        self.line = line
        self.col = col
        super().__init__(
            f"unsupported feature {flag!r} at {line}:{col}; "
            "this toolchain accepts :strips, :typing and :negative-preconditions only"
        )


class ArityError(PddlError):
    """A literal or step whose argument count differs from its schema."""

    def __init__(self, symbol: str, expected: int, got: int, line: int = 0, col: int = 0):
        self.symbol = symbol
        self.expected = expected
        self.got = got
        self.line = line
        self.col = col
        super().__init__(f"{symbol!r} expects {expected} argument(s), got {got} at {line}:{col}")


class UndeclaredSymbol(PddlError):
    """Reference to a predicate, type, variable or object that was never declared."""

    def __init__(self, name: str, line: int = 0, col: int = 0):
        self.name = name
        self.line = line
        self.col = col
        super().__init__(f"undeclared symbol {name!r} at {line}:{col}")


class DomainMismatch(PddlError):
    """Problem file names a domain other than the one it is parsed against."""

    def __init__(self, declared: str, expected: str):
        self.declared = declared
        self.expected = expected
        super().__init__(f"problem declares domain {declared!r}, expected {expected!r}")


@dataclass(frozen=True)
class Diagnostic:
    """One validation finding, printable as ``file:line:col: severity: message``."""

    severity: str  # "error" or "warning"
    message: str
    line: int = 0
    col: int = 0
    file: str = "<input>"

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.col}: {self.severity}: {self.message}"
