"""Lexer and recursive-descent parser for the two teaching dialects."""

from __future__ import annotations

from dataclasses import dataclass

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
    GlobalDecl,
    IfStmt,
    IntLit,
    NewExpr,
    NullLit,
    Param,
    RecordDecl,
    RecordField,
    ReturnStmt,
    StrLit,
    SyntaxDiagnostic,
    Token,
    Unary,
    VarDecl,
    VarRead,
    WhileStmt,
)

JAVA = "java"
CPP = "cpp"

_PUNCT_2 = ("->", "&&", "||", "==", "!=", "<=", ">=", "[]")
_PUNCT_1 = "{}()[];,.*&=<>+-/%!"

_ESCAPES = {"n": "\n", "t": "\t", "r": "\r", "0": "\0", "\\": "\\", "'": "'", '"': '"'}

_BASE_TYPES = {JAVA: {"int", "char", "boolean", "String"}, CPP: {"int", "char", "bool"}}
_NULL_WORDS = {JAVA: {"null"}, CPP: {"NULL", "nullptr"}}

_RESERVED_COMMON = {
    "if", "else", "while", "return", "new", "true", "false", "void",
    "class", "struct", "public", "private", "protected", "static",
}


def _reserved(dialect: str) -> set:
    return _RESERVED_COMMON | _BASE_TYPES[dialect] | _NULL_WORDS[dialect]


def tokenize(source: str, dialect: str) -> list:
    tokens = []
    i = 0
    line = 1
    col = 1
    n = len(source)

    def err(message, ln, cl):
        raise SyntaxDiagnostic(message, ln, cl)

    while i < n:
        ch = source[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if source.startswith("//", i):
            while i < n and source[i] != "\n":
                i += 1
            continue
        if source.startswith("/*", i):
            start_line, start_col = line, col
            i += 2
            col += 2
            while i < n and not source.startswith("*/", i):
                if source[i] == "\n":
                    line += 1
                    col = 1
                else:
                    col += 1
                i += 1
            if i >= n:
                err("unterminated comment", start_line, start_col)
            i += 2
            col += 2
            continue
        if ch.isdigit():
            start = i
            start_col = col
            while i < n and source[i].isdigit():
                i += 1
                col += 1
            text = source[start:i]
            tokens.append(Token("int", text, line, start_col, int(text)))
            continue
        if ch.isalpha() or ch == "_":
            start = i
            start_col = col
            while i < n and (source[i].isalnum() or source[i] == "_"):
                i += 1
                col += 1
            tokens.append(Token("ident", source[start:i], line, start_col))
            continue
        if ch == "'":
            start_col = col
            i += 1
            col += 1
            if i >= n:
                err("unterminated character literal", line, start_col)
            if source[i] == "\\":
                i += 1
                col += 1
                if i >= n or source[i] not in _ESCAPES:
                    err("bad escape in character literal", line, start_col)
                value = _ESCAPES[source[i]]
                i += 1
                col += 1
            else:
                value = source[i]
                if value in ("'", "\n"):
                    err("bad character literal", line, start_col)
                i += 1
                col += 1
            if i >= n or source[i] != "'":
                err("unterminated character literal", line, start_col)
            i += 1
            col += 1
            tokens.append(Token("char", value, line, start_col, value))
            continue
        if ch == '"':
            start_col = col
            i += 1
            col += 1
            chars = []
            while i < n and source[i] != '"':
                if source[i] == "\n":
                    err("unterminated string literal", line, start_col)
                if source[i] == "\\":
                    i += 1
                    col += 1
                    if i >= n or source[i] not in _ESCAPES:
                        err("bad escape in string literal", line, start_col)
                    chars.append(_ESCAPES[source[i]])
                else:
                    chars.append(source[i])
                i += 1
                col += 1
            if i >= n:
                err("unterminated string literal", line, start_col)
            i += 1
            col += 1
            tokens.append(Token("string", "".join(chars), line, start_col, "".join(chars)))
            continue
        two = source[i : i + 2]
        if two in _PUNCT_2:
            tokens.append(Token("punct", two, line, col))
            i += 2
            col += 2
            continue
        if ch in _PUNCT_1:
            tokens.append(Token("punct", ch, line, col))
            i += 1
            col += 1
            continue
        err(f"unexpected character {ch!r}", line, col)
    tokens.append(Token("eof", "", line, col))
    return tokens


@dataclass
class ParsedSource:
    dialect: str
    records: list  # RecordDecl
    functions: list  # FunctionDecl
    globals: list  # GlobalDecl, cpp only


class _Parser:
    def __init__(self, tokens: list, dialect: str):
        self.tokens = tokens
        self.pos = 0
        self.dialect = dialect
        self.reserved = _reserved(dialect)

    # -- token helpers ------------------------------------------------------

    def peek(self, ahead: int = 0) -> Token:
        idx = min(self.pos + ahead, len(self.tokens) - 1)
        return self.tokens[idx]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def at_punct(self, text: str) -> bool:
        tok = self.peek()
        return tok.kind == "punct" and tok.text == text

    def at_word(self, text: str) -> bool:
        tok = self.peek()
        return tok.kind == "ident" and tok.text == text

    def expect_punct(self, text: str) -> Token:
        if not self.at_punct(text):
            tok = self.peek()
            raise SyntaxDiagnostic(f"expected {text!r}", tok.line, tok.column)
        return self.advance()

    def expect_word(self, text: str) -> Token:
        if not self.at_word(text):
            tok = self.peek()
            raise SyntaxDiagnostic(f"expected {text!r}", tok.line, tok.column)
        return self.advance()

    def expect_name(self) -> Token:
        tok = self.peek()
        if tok.kind != "ident" or tok.text in self.reserved:
            raise SyntaxDiagnostic("expected a name", tok.line, tok.column)
        return self.advance()

    # -- types --------------------------------------------------------------

    def at_type_start(self) -> bool:
        tok = self.peek()
        return tok.kind == "ident" and (
            tok.text in _BASE_TYPES[self.dialect] or tok.text not in self.reserved
        )

    def parse_type(self, allow_void: bool = False) -> str:
        tok = self.peek()
        if tok.kind != "ident":
            raise SyntaxDiagnostic("expected a type", tok.line, tok.column)
        if tok.text == "void":
            if not allow_void:
                raise SyntaxDiagnostic('"void" is only valid as a return type', tok.line, tok.column)
            self.advance()
            return "void"
        if tok.text in self.reserved and tok.text not in _BASE_TYPES[self.dialect]:
            raise SyntaxDiagnostic("expected a type", tok.line, tok.column)
        self.advance()
        name = "java.lang.String" if (self.dialect == JAVA and tok.text == "String") else tok.text
        if self.dialect == JAVA:
            while self.at_punct("[]"):
                self.advance()
                name += "[]"
            # also tolerate split "[" "]"
            while self.at_punct("["):
                self.advance()
                self.expect_punct("]")
                name += "[]"
        else:
            while self.at_punct("*"):
                self.advance()
                name += "*"
        return name

    def _looks_like_decl(self) -> bool:
        """In statement position, decide declaration vs expression."""
        tok = self.peek()
        if tok.kind != "ident":
            return False
        if tok.text in _BASE_TYPES[self.dialect]:
            return True
        if tok.text in self.reserved:
            return False
        # record-typed declaration: Name ident, Name* ident, Name[] ident
        k = 1
        if self.dialect == CPP:
            while self.peek(k).kind == "punct" and self.peek(k).text == "*":
                k += 1
            if k == 1:
                return self.peek(1).kind == "ident" and self.peek(1).text not in self.reserved
            return self.peek(k).kind == "ident" and self.peek(k).text not in self.reserved
        while self.peek(k).kind == "punct" and self.peek(k).text in ("[]",):
            k += 1
        return self.peek(k).kind == "ident" and self.peek(k).text not in self.reserved

    # -- expressions ---------------------------------------------------------

    _LEVELS = (("||",), ("&&",), ("==", "!="), ("<", "<=", ">", ">="), ("+", "-"), ("*", "/", "%"))

    def parse_expr(self) -> Expr:
        return self._parse_binary(0)

    def _parse_binary(self, level: int) -> Expr:
        if level == len(self._LEVELS):
            return self._parse_unary()
        left = self._parse_binary(level + 1)
        while self.peek().kind == "punct" and self.peek().text in self._LEVELS[level]:
            op = self.advance()
            right = self._parse_binary(level + 1)
            left = Binary(left.line, left.column, op.text, left, right)
        return left

    def _parse_unary(self) -> Expr:
        tok = self.peek()
        if tok.kind == "punct" and tok.text in ("-", "!"):
            self.advance()
            return Unary(tok.line, tok.column, tok.text, self._parse_unary())
        if self.dialect == CPP and tok.kind == "punct" and tok.text in ("*", "&"):
            self.advance()
            return Unary(tok.line, tok.column, tok.text, self._parse_unary())
        return self._parse_postfix()

    def _parse_postfix(self) -> Expr:
        expr = self._parse_primary()
        while True:
            tok = self.peek()
            if tok.kind == "punct" and tok.text == ".":
                self.advance()
                name = self.expect_name()
                expr = FieldRead(tok.line, tok.column, expr, name.text, arrow=False)
            elif tok.kind == "punct" and tok.text == "->":
                if self.dialect != CPP:
                    raise SyntaxDiagnostic('"->" is not valid in this dialect', tok.line, tok.column)
                self.advance()
                name = self.expect_name()
                expr = FieldRead(tok.line, tok.column, expr, name.text, arrow=True)
            else:
                return expr

    def _parse_primary(self) -> Expr:
        tok = self.peek()
        if tok.kind == "int":
            self.advance()
            return IntLit(tok.line, tok.column, tok.value)
        if tok.kind == "char":
            self.advance()
            return CharLit(tok.line, tok.column, tok.value)
        if tok.kind == "string":
            self.advance()
            return StrLit(tok.line, tok.column, tok.value)
        if tok.kind == "ident":
            if tok.text in ("true", "false"):
                self.advance()
                return BoolLit(tok.line, tok.column, tok.text == "true")
            if tok.text in _NULL_WORDS[self.dialect]:
                self.advance()
                return NullLit(tok.line, tok.column)
            if tok.text == "new":
                self.advance()
                name = self.expect_name()
                self.expect_punct("(")
                self.expect_punct(")")
                return NewExpr(tok.line, tok.column, name.text)
            if tok.text in self.reserved:
                raise SyntaxDiagnostic(f"unexpected {tok.text!r}", tok.line, tok.column)
            self.advance()
            if self.at_punct("("):
                self.advance()
                args = []
                if not self.at_punct(")"):
                    args.append(self.parse_expr())
                    while self.at_punct(","):
                        self.advance()
                        args.append(self.parse_expr())
                self.expect_punct(")")
                return CallExpr(tok.line, tok.column, tok.text, args)
            return VarRead(tok.line, tok.column, tok.text)
        if tok.kind == "punct" and tok.text == "(":
            self.advance()
            inner = self.parse_expr()
            self.expect_punct(")")
            return inner
        raise SyntaxDiagnostic("expected an expression", tok.line, tok.column)

    # -- statements -----------------------------------------------------------

    def parse_block(self) -> tuple:
        """Parse `{ stmt* }`; returns (statements, close_brace_line)."""
        self.expect_punct("{")
        stmts = []
        while not self.at_punct("}"):
            if self.peek().kind == "eof":
                tok = self.peek()
                raise SyntaxDiagnostic('expected "}"', tok.line, tok.column)
            stmts.append(self.parse_statement())
        close = self.advance()
        return stmts, close.line

    def parse_statement(self):
        tok = self.peek()
        if self.at_word("if"):
            return self._parse_if()
        if self.at_word("while"):
            self.advance()
            self.expect_punct("(")
            cond = self.parse_expr()
            self.expect_punct(")")
            body, _ = self.parse_block()
            return WhileStmt(tok.line, tok.column, cond, body)
        if self.at_word("return"):
            self.advance()
            value = None
            if not self.at_punct(";"):
                value = self.parse_expr()
            self.expect_punct(";")
            return ReturnStmt(tok.line, tok.column, value)
        if self.dialect == CPP and self.at_punct("*"):
            target = self._parse_unary()
            self.expect_punct("=")
            value = self.parse_expr()
            self.expect_punct(";")
            return Assign(tok.line, tok.column, target, value)
        if self._looks_like_decl():
            decl_type = self.parse_type()
            name = self.expect_name()
            init = None
            if self.at_punct("="):
                self.advance()
                init = self.parse_expr()
            self.expect_punct(";")
            return VarDecl(tok.line, tok.column, decl_type, name.text, init)
        expr = self.parse_expr()
        if self.at_punct("="):
            if not isinstance(expr, (VarRead, FieldRead)):
                raise SyntaxDiagnostic("invalid assignment target", tok.line, tok.column)
            self.advance()
            value = self.parse_expr()
            self.expect_punct(";")
            return Assign(tok.line, tok.column, expr, value)
        if isinstance(expr, CallExpr):
            self.expect_punct(";")
            return ExprStmt(tok.line, tok.column, expr)
        raise SyntaxDiagnostic("expected a statement", tok.line, tok.column)

    def _parse_if(self):
        tok = self.expect_word("if")
        self.expect_punct("(")
        cond = self.parse_expr()
        self.expect_punct(")")
        then_body, _ = self.parse_block()
        else_body = None
        if self.at_word("else"):
            self.advance()
            if self.at_word("if"):
                else_body = [self._parse_if()]
            else:
                else_body, _ = self.parse_block()
        return IfStmt(tok.line, tok.column, cond, then_body, else_body)

    # -- declarations ----------------------------------------------------------

    def parse_params(self) -> list:
        self.expect_punct("(")
        params = []
        if not self.at_punct(")"):
            while True:
                tok = self.peek()
                decl_type = self.parse_type()
                name = self.expect_name()
                params.append(Param(decl_type, name.text, tok.line, tok.column))
                if not self.at_punct(","):
                    break
                self.advance()
        self.expect_punct(")")
        return params

    def parse_java_source(self) -> ParsedSource:
        records = []
        functions = []
        while self.peek().kind != "eof":
            while self.peek().kind == "ident" and self.peek().text in ("public", "private", "protected"):
                self.advance()
            self.expect_word("class")
            cls = self.expect_name()
            self.expect_punct("{")
            fields = []
            while not self.at_punct("}"):
                tok = self.peek()
                if tok.kind == "eof":
                    raise SyntaxDiagnostic('expected "}"', tok.line, tok.column)
                while self.peek().kind == "ident" and self.peek().text in (
                    "public", "private", "protected", "static",
                ):
                    self.advance()
                start = self.peek()
                decl_type = self.parse_type(allow_void=True)
                name = self.expect_name()
                if self.at_punct("("):
                    params = self.parse_params()
                    body, close_line = self.parse_block()
                    functions.append(
                        FunctionDecl(name.text, params, decl_type, body, start.line, close_line)
                    )
                else:
                    if decl_type == "void":
                        raise SyntaxDiagnostic('"void" is only valid as a return type', start.line, start.column)
                    self.expect_punct(";")
                    fields.append(RecordField(decl_type, name.text, start.line))
            records.append(RecordDecl(cls.text, fields, cls.line))
            self.advance()  # closing brace of the class
        return ParsedSource(JAVA, records, functions, [])

    def parse_cpp_source(self) -> ParsedSource:
        records = []
        functions = []
        globals_ = []
        while self.peek().kind != "eof":
            if self.at_word("struct"):
                self.advance()
                name = self.expect_name()
                self.expect_punct("{")
                fields = []
                while not self.at_punct("}"):
                    tok = self.peek()
                    if tok.kind == "eof":
                        raise SyntaxDiagnostic('expected "}"', tok.line, tok.column)
                    decl_type = self.parse_type()
                    fname = self.expect_name()
                    self.expect_punct(";")
                    fields.append(RecordField(decl_type, fname.text, tok.line))
                self.advance()
                self.expect_punct(";")
                records.append(RecordDecl(name.text, fields, name.line))
                continue
            start = self.peek()
            decl_type = self.parse_type(allow_void=True)
            name = self.expect_name()
            if self.at_punct("("):
                params = self.parse_params()
                body, close_line = self.parse_block()
                functions.append(
                    FunctionDecl(name.text, params, decl_type, body, start.line, close_line)
                )
            else:
                if decl_type == "void":
                    raise SyntaxDiagnostic('"void" is only valid as a return type', start.line, start.column)
                init = None
                if self.at_punct("="):
                    self.advance()
                    init = self.parse_expr()
                self.expect_punct(";")
                globals_.append(GlobalDecl(decl_type, name.text, init, start.line, start.column))
        return ParsedSource(CPP, records, functions, globals_)


def parse_source(source: str, dialect: str) -> ParsedSource:
    """Tokenize and parse one source file; raises SyntaxDiagnostic on bad input."""
    if dialect not in (JAVA, CPP):
        raise ValueError(f"unknown dialect: {dialect!r}")
    parser = _Parser(tokenize(source, dialect), dialect)
    if dialect == JAVA:
        parsed = parser.parse_java_source()
    else:
        parsed = parser.parse_cpp_source()
    tok = parser.peek()
    if tok.kind != "eof":
        raise SyntaxDiagnostic("unexpected trailing input", tok.line, tok.column)
    return parsed
