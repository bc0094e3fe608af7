"""Recursive-descent parser for the textual LTL grammar.

Precedence, loosest first: ``->``/``<->`` (right-assoc), ``|``, ``&``,
``U``/``R`` (right-assoc), then the prefix operators ``! X F G``.
"""
from __future__ import annotations

import re

from . import formula as fm
from .formula import Formula


class LtlSyntaxError(ValueError):
    def __init__(self, message: str, line: int, column: int, expected: list[str]):
        self.line = line
        self.column = column
        self.expected = sorted(set(expected))
        super().__init__(
            f"{line}:{column}: {message}; expected one of: {', '.join(self.expected)}"
        )


_TOKEN = re.compile(
    r"(?P<ws>\s+)|(?P<op><->|->|[!&|()])|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
)
_KEYWORDS = {"X", "F", "G", "U", "R", "true", "false"}
_PRIMARY_START = ["identifier", "true", "false", "(", "!", "X", "F", "G"]


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens: list[tuple[str, str, int]] = []  # (kind, value, offset)
        pos = 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if m is None:
                self._fail(f"unexpected character {text[pos]!r}", pos, _PRIMARY_START)
            if m.lastgroup == "op":
                self.tokens.append((m.group(), m.group(), pos))
            elif m.lastgroup == "ident":
                v = m.group()
                # "GFa" reads as G F a: atom names never start with X, F or G
                while len(v) > 1 and v[0] in "XFG":
                    self.tokens.append((v[0], v[0], pos))
                    v, pos = v[1:], pos + 1
                self.tokens.append((v if v in _KEYWORDS else "identifier", v, pos))
                pos = m.start() + len(m.group())
                continue
            pos = m.end()
        self.tokens.append(("eof", "", len(text)))
        self.i = 0

    def _fail(self, message: str, offset: int, expected: list[str]):
        line = self.text.count("\n", 0, offset) + 1
        col = offset - (self.text.rfind("\n", 0, offset) + 1) + 1
        raise LtlSyntaxError(message, line, col, expected)

    def peek(self) -> str:
        return self.tokens[self.i][0]

    def take(self) -> tuple[str, str, int]:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind: str, expected: list[str]):
        if self.peek() != kind:
            _, val, off = self.tokens[self.i]
            self._fail(f"unexpected {val or 'end of input'!r}", off, expected)
        return self.take()

    def parse(self) -> Formula:
        f = self.implication()
        self.expect("eof", ["&", "|", "->", "<->", "U", "R", "end of input"])
        return f

    def implication(self) -> Formula:
        lhs = self.disjunction()
        if self.peek() == "->":
            self.take()
            return fm.implies(lhs, self.implication())
        if self.peek() == "<->":
            self.take()
            return fm.iff(lhs, self.implication())
        return lhs

    def disjunction(self) -> Formula:
        parts = [self.conjunction()]
        while self.peek() == "|":
            self.take()
            parts.append(self.conjunction())
        return fm.disj(parts)

    def conjunction(self) -> Formula:
        parts = [self.binary()]
        while self.peek() == "&":
            self.take()
            parts.append(self.binary())
        return fm.conj(parts)

    def binary(self) -> Formula:
        lhs = self.unary()
        if self.peek() == "U":
            self.take()
            return fm.until(lhs, self.binary())
        if self.peek() == "R":
            self.take()
            return fm.release(lhs, self.binary())
        return lhs

    def unary(self) -> Formula:
        kind = self.peek()
        if kind == "!":
            self.take()
            return fm.neg(self.unary())
        if kind == "X":
            self.take()
            return fm.nxt(self.unary())
        if kind == "F":
            self.take()
            return fm.eventually(self.unary())
        if kind == "G":
            self.take()
            return fm.always(self.unary())
        return self.primary()

    def primary(self) -> Formula:
        kind, val, off = self.tokens[self.i]
        if kind == "identifier":
            self.take()
            return fm.atom(val)
        if kind == "true":
            self.take()
            return fm.TT
        if kind == "false":
            self.take()
            return fm.FF
        if kind == "(":
            self.take()
            f = self.implication()
            self.expect(")", [")", "&", "|", "->", "<->", "U", "R"])
            return f
        self._fail(f"unexpected {val or 'end of input'!r}", off, _PRIMARY_START)


def parse(text: str) -> Formula:
    """Parse ``text`` into a (not yet NNF) hash-consed formula."""
    return _Parser(text).parse()
