"""Token and AST definitions for the teaching language, plus source diagnostics."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union


class Diagnostic(Exception):
    """A source-level problem with a line and column position (both 1-based)."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.message = message
        self.line = line
        self.column = column

    def to_document(self) -> dict:
        return {"line": self.line, "column": self.column, "message": self.message}


class SyntaxDiagnostic(Diagnostic):
    pass


class TypeDiagnostic(Diagnostic):
    pass


@dataclass(frozen=True)
class Token:
    kind: str  # "ident" | "int" | "char" | "string" | "punct" | "eof"
    text: str
    line: int
    column: int
    # decoded payload for char/string literals
    value: object = None


# ---------------------------------------------------------------------------
# Expressions. Every node carries the position of its first token.


@dataclass
class Expr:
    line: int
    column: int


@dataclass
class IntLit(Expr):
    value: int


@dataclass
class BoolLit(Expr):
    value: bool


@dataclass
class CharLit(Expr):
    value: str  # single character, already unescaped


@dataclass
class StrLit(Expr):
    value: str


@dataclass
class NullLit(Expr):
    pass


@dataclass
class VarRead(Expr):
    name: str


@dataclass
class FieldRead(Expr):
    obj: Expr
    field: str
    arrow: bool  # p->f when true, obj.f when false


@dataclass
class Unary(Expr):
    op: str  # "-" | "!" | "*" | "&"
    operand: Expr


@dataclass
class Binary(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass
class NewExpr(Expr):
    type_name: str  # record name as written


@dataclass
class CallExpr(Expr):
    name: str
    args: list


# ---------------------------------------------------------------------------
# Statements.


@dataclass
class Stmt:
    line: int
    column: int


@dataclass
class VarDecl(Stmt):
    decl_type: str
    name: str
    init: Optional[Expr]


@dataclass
class Assign(Stmt):
    target: Expr  # VarRead, FieldRead, or Unary("*")
    value: Expr


@dataclass
class ExprStmt(Stmt):
    expr: Expr  # must be a CallExpr


@dataclass
class IfStmt(Stmt):
    cond: Expr
    then_body: list
    else_body: Optional[list]


@dataclass
class WhileStmt(Stmt):
    cond: Expr
    body: list


@dataclass
class ReturnStmt(Stmt):
    value: Optional[Expr]


# ---------------------------------------------------------------------------
# Declarations.


@dataclass
class Param:
    decl_type: str
    name: str
    line: int
    column: int


@dataclass
class RecordField:
    decl_type: str
    name: str
    line: int


@dataclass
class RecordDecl:
    name: str
    fields: list
    line: int


@dataclass
class FunctionDecl:
    name: str
    params: list
    return_type: str
    body: list
    line: int  # line of the signature
    close_line: int  # line of the closing brace; the function-exit pause point


@dataclass
class GlobalDecl:
    decl_type: str
    name: str
    init: Optional[Expr]  # restricted to literals
    line: int
    column: int


Statement = Union[VarDecl, Assign, ExprStmt, IfStmt, WhileStmt, ReturnStmt]
