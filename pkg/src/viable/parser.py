"""Recursive-descent parser for the textual contract format.

    contract := (decl | section)*
    decl     := ("input" | "state") name ":" ("bool" | "int" | "real") ";"
    section  := ("assume" | "init" | "trans") expr ";"

Repeated sections of the same kind are conjoined; absent sections are
``true``.  ``--`` starts a line comment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .syntax import (
    TRUE,
    Binary,
    Contract,
    Expr,
    Ite,
    Kind,
    Lit,
    Sort,
    Unary,
    Var,
    VarDecl,
    conj,
)

KEYWORDS = {
    "input", "state", "assume", "init", "trans",
    "bool", "int", "real", "true", "false",
    "not", "and", "or", "div", "mod", "if", "then", "else",
}

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>--[^\n]*)
  | (?P<num>\d+(?:\.\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_.]*)
  | (?P<op>=>|<>|<=|>=|[<>=+\-*():;'])
    """,
    re.VERBOSE,
)


class ContractError(Exception):
    """Base class for rejected contract sources."""


class ParseError(ContractError):
    def __init__(self, line: int, col: int, message: str):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col
        self.message = message


@dataclass(frozen=True)
class Token:
    kind: str  # num, ident, kw, op, eof
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise ParseError(line, col, f"unexpected character {text[pos]!r}")
        kind = m.lastgroup
        chunk = m.group()
        if kind == "ident" and chunk in KEYWORDS:
            kind = "kw"
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, chunk, line, col))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = pos + chunk.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


_CMP = ("=", "<>", "<", "<=", ">", ">=")


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def at(self, *texts: str) -> bool:
        t = self.tok
        return t.kind in ("kw", "op") and t.text in texts

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(f"expected {text!r}")
        return self.advance()

    def fail(self, message: str):
        t = self.tok
        found = "end of input" if t.kind == "eof" else repr(t.text)
        raise ParseError(t.line, t.col, f"{message}, found {found}")

    # -- top level

    def contract(self) -> Contract:
        decls = []
        sections = {"assume": [], "init": [], "trans": []}
        while self.tok.kind != "eof":
            if self.at("input", "state"):
                decls.append(self.decl())
            elif self.at("assume", "init", "trans"):
                which = self.advance().text
                sections[which].append(self.expr())
                self.expect(";")
            else:
                self.fail("expected a declaration or a section")
        return Contract(
            tuple(decls),
            assumption=_join(sections["assume"]),
            initial=_join(sections["init"]),
            transition=_join(sections["trans"]),
        )

    def decl(self) -> VarDecl:
        kind = Kind(self.advance().text)
        if self.tok.kind != "ident":
            self.fail("expected a variable name")
        name = self.advance().text
        self.expect(":")
        if not self.at("bool", "int", "real"):
            self.fail("expected a sort (bool, int or real)")
        sort = Sort(self.advance().text)
        self.expect(";")
        return VarDecl(name, sort, kind)

    # -- expressions, lowest precedence first

    def expr(self) -> Expr:
        if self.at("if"):
            start = self.advance()
            cond = self.expr()
            self.expect("then")
            then = self.expr()
            self.expect("else")
            orelse = self.expr()
            return Ite(cond, then, orelse, pos=(start.line, start.col))
        return self.implies()

    def implies(self) -> Expr:
        left = self.disj()
        if self.at("=>"):
            t = self.advance()
            right = self.implies_rhs()
            return Binary("=>", left, right, pos=(t.line, t.col))
        return left

    def implies_rhs(self) -> Expr:
        # "a => if c then x else y" is accepted without parentheses
        return self.expr() if self.at("if") else self.implies()

    def disj(self) -> Expr:
        return self.left_assoc(self.conj_, ("or",))

    def conj_(self) -> Expr:
        return self.left_assoc(self.negation, ("and",))

    def negation(self) -> Expr:
        if self.at("not"):
            t = self.advance()
            return Unary("not", self.negation(), pos=(t.line, t.col))
        return self.comparison()

    def comparison(self) -> Expr:
        left = self.additive()
        if self.at(*_CMP):
            t = self.advance()
            right = self.additive()
            if self.at(*_CMP):
                self.fail("comparison operators do not associate; add parentheses")
            return Binary(t.text, left, right, pos=(t.line, t.col))
        return left

    def additive(self) -> Expr:
        return self.left_assoc(self.multiplicative, ("+", "-"))

    def multiplicative(self) -> Expr:
        return self.left_assoc(self.unary, ("*", "div", "mod"))

    def left_assoc(self, operand, ops) -> Expr:
        left = operand()
        while self.at(*ops):
            t = self.advance()
            left = Binary(t.text, left, operand(), pos=(t.line, t.col))
        return left

    def unary(self) -> Expr:
        if self.at("-"):
            t = self.advance()
            if self.tok.kind == "num":
                value = _number(self.advance().text)
                return Lit(-value, pos=(t.line, t.col))
            return Unary("-", self.unary(), pos=(t.line, t.col))
        return self.primary()

    def primary(self) -> Expr:
        t = self.tok
        pos = (t.line, t.col)
        if t.kind == "num":
            self.advance()
            return Lit(_number(t.text), pos=pos)
        if self.at("true", "false"):
            self.advance()
            return Lit(t.text == "true", pos=pos)
        if self.at("real"):
            self.advance()
            self.expect("(")
            arg = self.expr()
            self.expect(")")
            return Unary("real", arg, pos=pos)
        if self.at("("):
            self.advance()
            inner = self.expr()
            self.expect(")")
            return inner
        if t.kind == "ident":
            self.advance()
            primed = False
            if self.at("'"):
                self.advance()
                primed = True
            return Var(t.text, primed, pos=pos)
        if self.at("if"):
            return self.expr()
        self.fail("expected an expression")


def _number(text: str):
    return Fraction(text) if "." in text else int(text)


def _join(exprs: list[Expr]) -> Expr:
    return conj(*exprs) if exprs else TRUE


def parse_contract(text: str) -> Contract:
    """Parse contract source text; raises ParseError with a line and column."""
    return _Parser(text).contract()


def parse_expr(text: str) -> Expr:
    p = _Parser(text)
    e = p.expr()
    if p.tok.kind != "eof":
        p.fail("unexpected trailing input")
    return e
