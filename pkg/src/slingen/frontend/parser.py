"""Recursive-descent parser for the LA concrete syntax.

Concrete decisions (the published grammar is typeset math): postfix «'»
for transposition, «inv(X)» and «sqrt(x)», «#» line comments, loops as
«for (i = lo:hi:step) { ... }», and element/range indexing «A(i, j:k)».
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..affine import Aff
from .astnodes import (
    Add,
    Assign,
    Div,
    Expr,
    For,
    Inverse,
    Literal,
    Mul,
    Neg,
    OperandDecl,
    OperandRef,
    Program,
    RegionRef,
    Sqrt,
    Statement,
    Sub,
    Transpose,
    PROPERTIES,
)


class ParseError(Exception):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {msg}")
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(
    r"""(?P<ws>\s+)
      | (?P<comment>\#[^\n]*)
      | (?P<float>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+|\d+[eE][+-]?\d+)
      | (?P<int>\d+)
      | (?P<id>[A-Za-z_][A-Za-z_0-9]*)
      | (?P<punct>[(){}<>,;=+\-*/:']) """,
    re.VERBOSE,
)

_KEYWORDS = {"Mat", "Vec", "Sca", "In", "Out", "InOut", "for", "inv", "sqrt", "ow"}


def _tokenize(source: str) -> list[Token]:
    toks: list[Token] = []
    line, col, pos = 1, 1, 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if not m:
            raise ParseError(f"unexpected character {source[pos]!r}", line, col)
        text = m.group(0)
        kind = m.lastgroup or "punct"
        if kind == "id" and text in _KEYWORDS:
            kind = text
        if kind not in ("ws", "comment"):
            toks.append(Token(kind, text, line, col))
        nl = text.count("\n")
        if nl:
            line += nl
            col = len(text) - text.rfind("\n")
        else:
            col += len(text)
        pos = m.end()
    toks.append(Token("eof", "", line, col))
    return toks


class _Parser:
    def __init__(self, source: str, name: str):
        self.toks = _tokenize(source)
        self.i = 0
        self.name = name

    # -- token helpers -------------------------------------------------
    def peek(self, k: int = 0) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self) -> Token:
        t = self.toks[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def expect(self, kind: str, what: str = "") -> Token:
        t = self.peek()
        if t.kind != kind and t.text != kind:
            raise ParseError(f"expected {what or kind!r}, found {t.text!r}", t.line, t.col)
        return self.next()

    def at(self, kind: str) -> bool:
        t = self.peek()
        return t.kind == kind or (t.kind == "punct" and t.text == kind)

    def accept(self, kind: str) -> bool:
        if self.at(kind):
            self.next()
            return True
        return False

    # -- grammar -------------------------------------------------------
    def program(self) -> Program:
        decl_groups: list[list[OperandDecl]] = []
        stmts: list[Statement] = []
        while not self.at("eof"):
            if self.peek().kind in ("Mat", "Vec", "Sca"):
                if stmts:
                    t = self.peek()
                    raise ParseError("declarations must precede statements", t.line, t.col)
                decl_groups.append(self.declaration())
            else:
                stmts.append(self.statement())
        return Program(decl_groups, stmts, self.name)

    def declaration(self) -> list[OperandDecl]:
        kw = self.next()
        kind = {"Mat": "matrix", "Vec": "vector", "Sca": "scalar"}[kw.kind]
        items: list[tuple[str, object, object]] = []
        while True:
            ident = self.expect("id", "operand name")
            rows: object = 1
            cols: object = 1
            if self.at("("):
                self.next()
                rows = self.size()
                if self.accept(","):
                    cols = self.size()
                elif kind == "matrix":
                    t = self.peek()
                    raise ParseError("matrix declarations need two sizes", t.line, t.col)
                self.expect(")")
            elif kind != "scalar":
                t = self.peek()
                raise ParseError(f"{kw.kind} declaration needs sizes", t.line, t.col)
            items.append((ident.text, rows, cols))
            if not self.accept(","):
                break
        self.expect("<")
        io = self.peek()
        if io.kind not in ("In", "Out", "InOut"):
            raise ParseError(f"expected iotype, found {io.text!r}", io.line, io.col)
        self.next()
        props: set[str] = set()
        overwrites = None
        while self.accept(","):
            t = self.next()
            if t.kind == "ow":
                self.expect("(")
                overwrites = self.expect("id", "operand name").text
                self.expect(")")
            elif t.kind == "id" and t.text in PROPERTIES:
                props.add(t.text)
            else:
                raise ParseError(f"unknown property keyword {t.text!r}", t.line, t.col)
        self.expect(">")
        self.expect(";")
        return [OperandDecl(n, kind, r, c, io.kind, frozenset(props), overwrites, kw.line)
                for n, r, c in items]

    def size(self):
        t = self.next()
        if t.kind == "int":
            v = int(t.text)
            if v <= 0:
                raise ParseError("sizes must be positive integers", t.line, t.col)
            return v
        if t.kind == "id":
            return t.text
        raise ParseError(f"non-integer size {t.text!r}", t.line, t.col)

    def statement(self) -> Statement:
        if self.at("for"):
            return self.for_loop()
        line = self.peek().line
        lhs = self.expr()
        self.expect("=")
        rhs = self.expr()
        self.expect(";")
        return Assign(lhs, rhs, line)

    def for_loop(self) -> For:
        kw = self.expect("for")
        self.expect("(")
        var = self.expect("id", "induction variable").text
        self.expect("=")
        lo = self.affine()
        self.expect(":")
        hi = self.affine()
        step = 1
        if self.accept(":"):
            t = self.expect("int", "loop step")
            step = int(t.text)
        self.expect(")")
        self.expect("{")
        body: list[Statement] = []
        while not self.at("}"):
            body.append(self.statement())
        self.expect("}")
        return For(var, lo, hi, step, body, kw.line)

    def expr(self) -> Expr:
        if self.accept("-"):
            node: Expr = Neg(self.term())
        else:
            node = self.term()
        while True:
            if self.accept("+"):
                node = Add(node, self.term())
            elif self.accept("-"):
                node = Sub(node, self.term())
            else:
                return node

    def term(self) -> Expr:
        node = self.factor()
        while True:
            if self.accept("*"):
                node = Mul(node, self.factor())
            elif self.accept("/"):
                node = Div(node, self.factor())
            else:
                return node

    def factor(self) -> Expr:
        node = self.primary()
        while self.at("'"):
            self.next()
            node = Transpose(node)
        return node

    def primary(self) -> Expr:
        t = self.peek()
        if self.accept("("):
            node = self.expr()
            self.expect(")")
            return node
        if t.kind in ("int", "float"):
            self.next()
            return Literal(float(t.text))
        if t.kind == "inv":
            self.next()
            self.expect("(")
            inner = self.expr()
            self.expect(")")
            return Inverse(inner)
        if t.kind == "sqrt":
            self.next()
            self.expect("(")
            inner = self.expr()
            self.expect(")")
            return Sqrt(inner)
        if t.kind == "id":
            self.next()
            if self.at("("):
                return self.region(t.text)
            return OperandRef(t.text)
        raise ParseError(f"unexpected token {t.text!r}", t.line, t.col)

    def region(self, name: str) -> Expr:
        self.expect("(")
        r_off, r_ext = self.index()
        if self.accept(","):
            c_off, c_ext = self.index()
        else:
            c_off, c_ext = Aff(0), Aff(1)
        self.expect(")")
        return RegionRef(name, r_off, c_off, r_ext, c_ext)

    def index(self) -> tuple[Aff, Aff]:
        lo = self.affine()
        if self.accept(":"):
            hi = self.affine()
            return lo, hi - lo
        return lo, Aff(1)

    def affine(self) -> Aff:
        node = self.affine_term()
        while True:
            if self.accept("+"):
                node = node + self.affine_term()
            elif self.at("-") and self.peek(1).kind in ("int", "id"):
                self.next()
                node = node - self.affine_term()
            else:
                return node

    def affine_term(self) -> Aff:
        t = self.next()
        if t.kind == "int":
            val = int(t.text)
            if self.at("*"):
                self.next()
                v = self.expect("id", "variable")
                return Aff.var(v.text, val)
            return Aff(val)
        if t.kind == "id":
            if self.at("*"):
                self.next()
                v = self.expect("int", "coefficient")
                return Aff.var(t.text, int(v.text))
            return Aff.var(t.text)
        raise ParseError(f"expected affine index, found {t.text!r}", t.line, t.col)


def parse(source: str, name: str = "program") -> Program:
    """Parse LA source text into a Program (no checking)."""
    return _Parser(source, name).program()
