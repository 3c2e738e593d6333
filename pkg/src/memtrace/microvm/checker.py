"""Two-pass static checker: collects types and signatures, then checks bodies.

Produces a Program, the validated unit the interpreter runs. All diagnostics
carry 1-based line and column positions.
"""

from __future__ import annotations

from dataclasses import dataclass

from .parser import CPP, JAVA, parse_source
from .syntax import (
    Assign,
    Binary,
    BoolLit,
    CallExpr,
    CharLit,
    Expr,
    ExprStmt,
    FieldRead,
    FunctionDecl,
    IfStmt,
    IntLit,
    NewExpr,
    NullLit,
    ReturnStmt,
    StrLit,
    TypeDiagnostic,
    Unary,
    VarDecl,
    VarRead,
    WhileStmt,
)

NULL_TYPE = "<null>"

_SCALARS = {JAVA: {"int", "char", "boolean"}, CPP: {"int", "char", "bool"}}
_BOOL = {JAVA: "boolean", CPP: "bool"}


@dataclass
class Program:
    dialect: str
    source: str
    records: dict  # name -> RecordDecl
    functions: dict  # name -> FunctionDecl
    globals: list  # GlobalDecl, cpp only
    main: FunctionDecl
    executable_lines: frozenset  # every line a snapshot can pause on
    exit_lines: frozenset  # closing-brace lines of functions
    call_lines: frozenset  # statement lines whose expressions invoke a function

    def record_fields(self, name: str) -> list:
        return self.records[name].fields


class _Checker:
    def __init__(self, parsed):
        self.dialect = parsed.dialect
        self.records = {}
        self.functions = {}
        self.globals = parsed.globals
        self.bool_type = _BOOL[self.dialect]
        for rec in parsed.records:
            if rec.name in self.records:
                raise TypeDiagnostic(f"duplicate type '{rec.name}'", rec.line, 1)
            self.records[rec.name] = rec
        for fn in parsed.functions:
            if fn.name in self.functions:
                raise TypeDiagnostic(f"duplicate function '{fn.name}'", fn.line, 1)
            self.functions[fn.name] = fn

    # -- type predicates ------------------------------------------------------

    def is_scalar(self, t: str) -> bool:
        return t in _SCALARS[self.dialect]

    def is_reference(self, t: str) -> bool:
        if self.dialect == JAVA:
            return t == "java.lang.String" or t in self.records or t.endswith("[]")
        return t.endswith("*")

    def is_value_type(self, t: str) -> bool:
        return self.is_scalar(t) or self.is_reference(t)

    def check_declared_type(self, t: str, line: int, column: int, allow_record_field=False):
        if self.is_scalar(t):
            return
        if self.dialect == JAVA:
            base = t
            while base.endswith("[]"):
                base = base[:-2]
            if base == "java.lang.String" or base in self.records or base in _SCALARS[JAVA]:
                return
            raise TypeDiagnostic(f"unknown type '{t}'", line, column)
        base = t.rstrip("*")
        stars = len(t) - len(base)
        if stars == 0:
            # bare struct values are not supported anywhere
            raise TypeDiagnostic(f"unknown type '{t}'", line, column)
        if base in self.records or base in _SCALARS[CPP]:
            return
        raise TypeDiagnostic(f"unknown type '{t}'", line, column)

    def assignable(self, target: str, value: str) -> bool:
        if target == value:
            return True
        return value == NULL_TYPE and self.is_reference(target)

    # -- signature pass ---------------------------------------------------------

    def check_signatures(self):
        for rec in self.records.values():
            seen = set()
            for f in rec.fields:
                if f.name in seen:
                    raise TypeDiagnostic(
                        f"duplicate field '{f.name}' in '{rec.name}'", f.line, 1
                    )
                seen.add(f.name)
                self.check_declared_type(f.decl_type, f.line, 1)
        for fn in self.functions.values():
            if fn.return_type != "void":
                self.check_declared_type(fn.return_type, fn.line, 1)
            seen = set()
            for p in fn.params:
                if p.name in seen:
                    raise TypeDiagnostic(f"duplicate parameter '{p.name}'", p.line, p.column)
                seen.add(p.name)
                self.check_declared_type(p.decl_type, p.line, p.column)
        for g in self.globals:
            self.check_declared_type(g.decl_type, g.line, g.column)
            if g.init is not None:
                t = self.literal_type(g.init)
                if t is None:
                    raise TypeDiagnostic(
                        "global initializers must be literals", g.init.line, g.init.column
                    )
                if not self.assignable(g.decl_type, t):
                    raise TypeDiagnostic(
                        f"cannot assign {t} to {g.decl_type}", g.init.line, g.init.column
                    )
        names = set()
        for g in self.globals:
            if g.name in names:
                raise TypeDiagnostic(f"duplicate global '{g.name}'", g.line, g.column)
            names.add(g.name)

    def literal_type(self, e: Expr):
        if isinstance(e, IntLit):
            return "int"
        if isinstance(e, CharLit):
            return "char"
        if isinstance(e, BoolLit):
            return self.bool_type
        if isinstance(e, NullLit):
            return NULL_TYPE
        return None

    def find_main(self) -> FunctionDecl:
        main = self.functions.get("main")
        if main is None:
            raise TypeDiagnostic("missing main", 1, 1)
        if main.return_type != "void":
            raise TypeDiagnostic("main must return void", main.line, 1)
        if self.dialect == JAVA:
            if len(main.params) == 1 and main.params[0].decl_type == "java.lang.String[]":
                return main
            if len(main.params) == 0:
                return main
            raise TypeDiagnostic("main must take () or (String[] args)", main.line, 1)
        if main.params:
            raise TypeDiagnostic("main must take no parameters", main.line, 1)
        return main

    # -- body pass ---------------------------------------------------------------

    def check_function(self, fn: FunctionDecl):
        declared = {}  # function-wide: name -> decl_type
        scopes = [{}]
        for p in fn.params:
            declared[p.name] = p.decl_type
            scopes[0][p.name] = p.decl_type
        self._check_block(fn, fn.body, declared, scopes)

    def _check_block(self, fn, stmts, declared, scopes):
        scopes.append({})
        for stmt in stmts:
            self._check_stmt(fn, stmt, declared, scopes)
        scopes.pop()

    def _lookup(self, name, scopes):
        for scope in reversed(scopes):
            if name in scope:
                return scope[name]
        for g in self.globals:
            if g.name == name:
                return g.decl_type
        return None

    def _check_stmt(self, fn, stmt, declared, scopes):
        if isinstance(stmt, VarDecl):
            self.check_declared_type(stmt.decl_type, stmt.line, stmt.column)
            if stmt.name in declared:
                raise TypeDiagnostic(f"duplicate variable '{stmt.name}'", stmt.line, stmt.column)
            if stmt.init is None and self.dialect == JAVA:
                raise TypeDiagnostic(
                    f"variable '{stmt.name}' must be initialized", stmt.line, stmt.column
                )
            if stmt.init is not None:
                vt = self.check_expr(stmt.init, scopes)
                if not self.assignable(stmt.decl_type, vt):
                    raise TypeDiagnostic(
                        f"cannot assign {vt} to {stmt.decl_type}", stmt.init.line, stmt.init.column
                    )
            declared[stmt.name] = stmt.decl_type
            scopes[-1][stmt.name] = stmt.decl_type
            return
        if isinstance(stmt, Assign):
            tt = self._check_target(stmt.target, scopes)
            vt = self.check_expr(stmt.value, scopes)
            if not self.assignable(tt, vt):
                raise TypeDiagnostic(
                    f"cannot assign {vt} to {tt}", stmt.value.line, stmt.value.column
                )
            return
        if isinstance(stmt, ExprStmt):
            self.check_expr(stmt.expr, scopes, allow_void=True)
            return
        if isinstance(stmt, IfStmt):
            ct = self.check_expr(stmt.cond, scopes)
            if ct != self.bool_type:
                raise TypeDiagnostic(
                    f"condition must be {self.bool_type}", stmt.cond.line, stmt.cond.column
                )
            self._check_block(fn, stmt.then_body, declared, scopes)
            if stmt.else_body is not None:
                self._check_block(fn, stmt.else_body, declared, scopes)
            return
        if isinstance(stmt, WhileStmt):
            ct = self.check_expr(stmt.cond, scopes)
            if ct != self.bool_type:
                raise TypeDiagnostic(
                    f"condition must be {self.bool_type}", stmt.cond.line, stmt.cond.column
                )
            self._check_block(fn, stmt.body, declared, scopes)
            return
        if isinstance(stmt, ReturnStmt):
            if fn.return_type == "void":
                if stmt.value is not None:
                    raise TypeDiagnostic(
                        "cannot return a value from a void function", stmt.line, stmt.column
                    )
                return
            if stmt.value is None:
                raise TypeDiagnostic("missing return value", stmt.line, stmt.column)
            vt = self.check_expr(stmt.value, scopes)
            if not self.assignable(fn.return_type, vt):
                raise TypeDiagnostic(
                    f"cannot return {vt} from a function returning {fn.return_type}",
                    stmt.value.line,
                    stmt.value.column,
                )
            return
        raise AssertionError(f"unhandled statement {stmt!r}")

    def _check_target(self, target, scopes) -> str:
        if isinstance(target, VarRead):
            t = self._lookup(target.name, scopes)
            if t is None:
                raise TypeDiagnostic(f"unknown variable '{target.name}'", target.line, target.column)
            return t
        if isinstance(target, FieldRead):
            return self.check_expr(target, scopes)
        if isinstance(target, Unary) and target.op == "*":
            ot = self.check_expr(target.operand, scopes)
            if not ot.endswith("*"):
                raise TypeDiagnostic("cannot dereference a non-pointer", target.line, target.column)
            base = ot[:-1]
            if base in self.records:
                raise TypeDiagnostic(
                    "cannot assign a whole struct through a pointer", target.line, target.column
                )
            return base
        raise TypeDiagnostic("invalid assignment target", target.line, target.column)

    def check_expr(self, e: Expr, scopes, allow_void: bool = False) -> str:
        t = self._expr_type(e, scopes)
        if t == "void" and not allow_void:
            raise TypeDiagnostic("void value used", e.line, e.column)
        return t

    def _expr_type(self, e: Expr, scopes) -> str:
        lit = self.literal_type(e)
        if lit is not None:
            return lit
        if isinstance(e, StrLit):
            if self.dialect == CPP:
                raise TypeDiagnostic(
                    "string literals are not supported in this dialect", e.line, e.column
                )
            return "java.lang.String"
        if isinstance(e, VarRead):
            t = self._lookup(e.name, scopes)
            if t is None:
                raise TypeDiagnostic(f"unknown variable '{e.name}'", e.line, e.column)
            return t
        if isinstance(e, FieldRead):
            return self._field_type(e, scopes)
        if isinstance(e, NewExpr):
            if e.type_name not in self.records:
                raise TypeDiagnostic(f"unknown type '{e.type_name}'", e.line, e.column)
            if self.dialect == JAVA:
                return e.type_name
            return e.type_name + "*"
        if isinstance(e, Unary):
            return self._unary_type(e, scopes)
        if isinstance(e, Binary):
            return self._binary_type(e, scopes)
        if isinstance(e, CallExpr):
            fn = self.functions.get(e.name)
            if fn is None:
                raise TypeDiagnostic(f"unknown function '{e.name}'", e.line, e.column)
            if len(e.args) != len(fn.params):
                raise TypeDiagnostic(
                    f"function '{e.name}' expects {len(fn.params)} arguments", e.line, e.column
                )
            for i, (arg, p) in enumerate(zip(e.args, fn.params)):
                at = self.check_expr(arg, scopes)
                if not self.assignable(p.decl_type, at):
                    raise TypeDiagnostic(
                        f"argument {i + 1} to '{e.name}': expected {p.decl_type}, got {at}",
                        arg.line,
                        arg.column,
                    )
            return fn.return_type
        raise AssertionError(f"unhandled expression {e!r}")

    def _field_type(self, e: FieldRead, scopes) -> str:
        if e.arrow:
            ot = self.check_expr(e.obj, scopes)
            base = ot[:-1] if ot.endswith("*") else None
            if base is None or base not in self.records:
                raise TypeDiagnostic(f"'->' requires a struct pointer, got {ot}", e.line, e.column)
            return self._record_field_type(base, e)
        if self.dialect == CPP:
            # only the (*p).f spelling reaches a struct value
            if isinstance(e.obj, Unary) and e.obj.op == "*":
                ot = self.check_expr(e.obj.operand, scopes)
                base = ot[:-1] if ot.endswith("*") else None
                if base is None or base not in self.records:
                    raise TypeDiagnostic(
                        f"cannot dereference {ot} as a struct", e.line, e.column
                    )
                return self._record_field_type(base, e)
            raise TypeDiagnostic("'.' requires a struct value; use '->'", e.line, e.column)
        ot = self.check_expr(e.obj, scopes)
        if ot not in self.records:
            raise TypeDiagnostic(f"'{ot}' has no fields", e.line, e.column)
        return self._record_field_type(ot, e)

    def _record_field_type(self, record_name: str, e: FieldRead) -> str:
        for f in self.records[record_name].fields:
            if f.name == e.field:
                return f.decl_type
        raise TypeDiagnostic(
            f"'{record_name}' has no field '{e.field}'", e.line, e.column
        )

    def _unary_type(self, e: Unary, scopes) -> str:
        if e.op == "-":
            ot = self.check_expr(e.operand, scopes)
            if ot != "int":
                raise TypeDiagnostic(f"unary '-' requires int, got {ot}", e.line, e.column)
            return "int"
        if e.op == "!":
            ot = self.check_expr(e.operand, scopes)
            if ot != self.bool_type:
                raise TypeDiagnostic(
                    f"'!' requires {self.bool_type}, got {ot}", e.line, e.column
                )
            return self.bool_type
        if e.op == "*":
            ot = self.check_expr(e.operand, scopes)
            if not ot.endswith("*"):
                raise TypeDiagnostic("cannot dereference a non-pointer", e.line, e.column)
            base = ot[:-1]
            if base in self.records:
                raise TypeDiagnostic(
                    "cannot use a struct value directly; access a field", e.line, e.column
                )
            return base
        if e.op == "&":
            if isinstance(e.operand, VarRead) or isinstance(e.operand, FieldRead):
                ot = self.check_expr(e.operand, scopes)
                return ot + "*"
            raise TypeDiagnostic("'&' requires a variable or field", e.line, e.column)
        raise AssertionError(f"unhandled unary {e.op!r}")

    def _binary_type(self, e: Binary, scopes) -> str:
        lt = self.check_expr(e.left, scopes)
        rt = self.check_expr(e.right, scopes)
        op = e.op
        if op in ("+", "-", "*", "/", "%"):
            if lt == "int" and rt == "int":
                return "int"
            raise TypeDiagnostic(f"'{op}' requires int operands", e.line, e.column)
        if op in ("<", "<=", ">", ">="):
            if lt == "int" and rt == "int":
                return self.bool_type
            raise TypeDiagnostic(f"'{op}' requires int operands", e.line, e.column)
        if op in ("&&", "||"):
            if lt == self.bool_type and rt == self.bool_type:
                return self.bool_type
            raise TypeDiagnostic(f"'{op}' requires {self.bool_type} operands", e.line, e.column)
        if op in ("==", "!="):
            if lt == rt and (self.is_scalar(lt) or self.is_reference(lt)):
                return self.bool_type
            both_ref = (lt == NULL_TYPE or self.is_reference(lt)) and (
                rt == NULL_TYPE or self.is_reference(rt)
            )
            if both_ref and (lt == rt or lt == NULL_TYPE or rt == NULL_TYPE):
                return self.bool_type
            raise TypeDiagnostic(f"cannot compare {lt} with {rt}", e.line, e.column)
        raise AssertionError(f"unhandled operator {op!r}")


# ---------------------------------------------------------------------------


def _statement_lines(stmts, into: set):
    for s in stmts:
        into.add(s.line)
        if isinstance(s, IfStmt):
            _statement_lines(s.then_body, into)
            if s.else_body is not None:
                _statement_lines(s.else_body, into)
        elif isinstance(s, WhileStmt):
            _statement_lines(s.body, into)


def _has_call(e) -> bool:
    if e is None:
        return False
    if isinstance(e, CallExpr):
        return True
    if isinstance(e, FieldRead):
        return _has_call(e.obj)
    if isinstance(e, Unary):
        return _has_call(e.operand)
    if isinstance(e, Binary):
        return _has_call(e.left) or _has_call(e.right)
    return False


def _call_lines(stmts, into: set):
    for s in stmts:
        exprs = []
        if isinstance(s, VarDecl):
            exprs = [s.init]
        elif isinstance(s, Assign):
            exprs = [s.target, s.value]
        elif isinstance(s, ExprStmt):
            exprs = [s.expr]
        elif isinstance(s, ReturnStmt):
            exprs = [s.value]
        elif isinstance(s, IfStmt):
            exprs = [s.cond]
            _call_lines(s.then_body, into)
            if s.else_body is not None:
                _call_lines(s.else_body, into)
        elif isinstance(s, WhileStmt):
            exprs = [s.cond]
            _call_lines(s.body, into)
        if any(_has_call(x) for x in exprs):
            into.add(s.line)


def parse_program(source: str, dialect: str) -> Program:
    """Parse and type-check source; raises Diagnostic subclasses on bad input."""
    parsed = parse_source(source, dialect)
    checker = _Checker(parsed)
    checker.check_signatures()
    main = checker.find_main()
    for fn in checker.functions.values():
        checker.check_function(fn)

    exec_lines = set()
    call_lines = set()
    for fn in checker.functions.values():
        _statement_lines(fn.body, exec_lines)
        _call_lines(fn.body, call_lines)
        exec_lines.add(fn.close_line)
    exit_lines = frozenset(fn.close_line for fn in checker.functions.values())

    return Program(
        dialect=parsed.dialect,
        source=source,
        records=checker.records,
        functions=checker.functions,
        globals=checker.globals,
        main=main,
        executable_lines=frozenset(exec_lines),
        exit_lines=exit_lines,
        call_lines=frozenset(call_lines),
    )
