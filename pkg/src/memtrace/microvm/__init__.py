"""Deterministic executor for a small teaching language (java and cpp dialects).

Parses and type-checks a program, then runs it one statement at a time,
capturing a full stack/heap snapshot at every pause point.
"""

from .syntax import Diagnostic, SyntaxDiagnostic, TypeDiagnostic
from .checker import Program, parse_program
from .vm import (
    BreakpointError,
    DebugSession,
    MiniRuntimeError,
    SessionFinishedError,
    capture_state,
)

__all__ = [
    "BreakpointError",
    "DebugSession",
    "Diagnostic",
    "MiniRuntimeError",
    "Program",
    "SessionFinishedError",
    "SyntaxDiagnostic",
    "TypeDiagnostic",
    "capture_state",
    "parse_program",
]
