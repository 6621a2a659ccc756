"""Recursive-descent parser for the infix expression grammar.

    expr  := term (('+'|'-') term)*
    term  := unary (('*'|'/') unary)*
    unary := '-' unary | pow
    pow   := atom ('^' unary)?
    atom  := NUMBER | IDENT | IDENT '(' expr ')' | '(' expr ')'

The tree is returned raw (no simplification).  Integer literals become exact
constants, literals with a fraction or exponent become floats.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .core import FUNCTIONS, Add, Const, Float, Func, Mul, Pow, Symbol, MINUS_ONE

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()]))"
)

_ATOM_START = frozenset({"NUMBER", "IDENT", "("})


class ParseError(ValueError):
    """Syntax error with the byte offset and the set of tokens that would fit."""

    def __init__(self, message: str, offset: int, expected=frozenset()):
        self.offset = offset
        self.expected = frozenset(expected)
        if self.expected:
            message = f"{message} at offset {offset}; expected one of {sorted(self.expected)}"
        else:
            message = f"{message} at offset {offset}"
        super().__init__(message)


class UnknownFunctionError(ParseError):
    pass


def _tokenize(text: str):
    toks = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        start = m.start(m.lastgroup)
        if m.lastgroup == "num":
            toks.append(("NUMBER", m.group("num"), start))
        elif m.lastgroup == "ident":
            toks.append(("IDENT", m.group("ident"), start))
        else:
            toks.append((m.group("op"), m.group("op"), start))
        pos = m.end()
    toks.append(("END", "", n))
    return toks


class _Parser:
    def __init__(self, text):
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.toks[self.i]

    def advance(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def fail(self, expected):
        kind, value, pos = self.tok
        what = "end of input" if kind == "END" else f"token {value!r}"
        raise ParseError(f"unexpected {what}", pos, expected)

    def expr(self):
        left = self.term()
        while self.tok[0] in ("+", "-"):
            op = self.advance()[0]
            right = self.term()
            left = Add((left, right if op == "+" else Mul((MINUS_ONE, right))))
        return left

    def term(self):
        left = self.unary()
        while self.tok[0] in ("*", "/"):
            op = self.advance()[0]
            right = self.unary()
            left = Mul((left, right if op == "*" else Pow(right, MINUS_ONE)))
        return left

    def unary(self):
        if self.tok[0] == "-":
            self.advance()
            return Mul((MINUS_ONE, self.unary()))
        return self.pow()

    def pow(self):
        base = self.atom()
        if self.tok[0] == "^":
            self.advance()
            return Pow(base, self.unary())
        return base

    def atom(self):
        kind, value, pos = self.tok
        if kind == "NUMBER":
            self.advance()
            if any(ch in value for ch in ".eE"):
                return Float(float(value))
            return Const(Fraction(int(value)))
        if kind == "IDENT":
            self.advance()
            if self.tok[0] == "(":
                if value not in FUNCTIONS:
                    raise UnknownFunctionError(f"unknown function {value!r}", pos)
                self.advance()
                arg = self.expr()
                self.expect(")")
                return Func(value, arg)
            return Symbol(value)
        if kind == "(":
            self.advance()
            inner = self.expr()
            self.expect(")")
            return inner
        self.fail(_ATOM_START | {"-"})

    def expect(self, kind):
        if self.tok[0] != kind:
            ops = {"+", "-", "*", "/", "^"}
            self.fail({kind} | ops)
        self.advance()


def parse(text: str):
    p = _Parser(text)
    e = p.expr()
    if p.tok[0] != "END":
        p.fail({"+", "-", "*", "/", "^", "END"})
    return e
