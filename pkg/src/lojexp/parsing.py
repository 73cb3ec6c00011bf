"""Tokenizer and recursive-descent parser for polynomial/series literals.

Grammar (explicit `*` required, `^` binds tighter than unary minus):

    expr   := term (('+' | '-') term)*
    term   := factor ('*' factor)*
    factor := ('+' | '-')* atom ('^' '-'? INT)?
    atom   := NUMBER | NUMBER 'i' | 'i' | NAME | '(' expr ')'

Numbers are exact: integers, `p/q` fractions, and finite decimals.  An `i`
suffix (or bare `i`) is the imaginary unit.  Negative exponents are only
accepted on bare variables, and only when `allow_negative` is set.

The result is a term table `dict[exponent_tuple, GaussianRational]` with no
zero coefficients, shared by the polynomial and series constructors.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Sequence

from .errors import ParseError
from .gaussian import GaussianRational

Table = dict[tuple[int, ...], GaussianRational]

_NUMBER = re.compile(r"\d+\.\d+|\d+/\d+|\d+")
_NAME = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")
_OPS = set("+-*^(),")


class _Token:
    __slots__ = ("kind", "value", "raw", "pos")

    def __init__(self, kind: str, value, raw: str, pos: int):
        self.kind = kind
        self.value = value
        self.raw = raw
        self.pos = pos

    def __repr__(self):
        return f"_Token({self.kind}, {self.raw!r}, {self.pos})"


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c in _OPS:
            tokens.append(_Token("OP", c, c, i))
            i += 1
            continue
        m = _NUMBER.match(text, i)
        if m:
            raw = m.group()
            value = Fraction(raw)
            end = m.end()
            # `3i`, `1/2i`: the i suffix is part of the literal unless it
            # starts a longer name (`2in` stays NUM * NAME and fails later).
            if end < n and text[end] == "i" and (end + 1 == n or not (text[end + 1].isalnum() or text[end + 1] == "_")):
                tokens.append(_Token("IMAG", value, raw + "i", i))
                i = end + 1
            else:
                tokens.append(_Token("NUM", value, raw, i))
                i = end
            continue
        m = _NAME.match(text, i)
        if m:
            raw = m.group()
            if raw == "i":
                tokens.append(_Token("IMAG", Fraction(1), raw, i))
            else:
                tokens.append(_Token("NAME", raw, raw, i))
            i = m.end()
            continue
        raise ParseError(f"unexpected character {c!r}", i)
    tokens.append(_Token("END", None, "", n))
    return tokens


def _tadd(a: Table, b: Table) -> Table:
    out = dict(a)
    for mono, coeff in b.items():
        s = out.get(mono, GaussianRational(0)) + coeff
        if s.is_zero:
            out.pop(mono, None)
        else:
            out[mono] = s
    return out


def _tneg(a: Table) -> Table:
    return {mono: -coeff for mono, coeff in a.items()}


def _tmul(a: Table, b: Table) -> Table:
    out: Table = {}
    for ma, ca in a.items():
        for mb, cb in b.items():
            mono = tuple(x + y for x, y in zip(ma, mb))
            s = out.get(mono, GaussianRational(0)) + ca * cb
            if s.is_zero:
                out.pop(mono, None)
            else:
                out[mono] = s
    return out


def _tpow(a: Table, k: int, nvars: int) -> Table:
    out: Table = {(0,) * nvars: GaussianRational(1)}
    base = a
    while k:
        if k & 1:
            out = _tmul(out, base)
        base = _tmul(base, base)
        k >>= 1
    return out


class _Parser:
    def __init__(self, tokens: list[_Token], varnames: Sequence[str], allow_negative: bool):
        self.tokens = tokens
        self.i = 0
        self.vars = {name: idx for idx, name in enumerate(varnames)}
        self.nvars = len(varnames)
        self.allow_negative = allow_negative

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def next(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, char: str) -> _Token:
        tok = self.next()
        if tok.kind != "OP" or tok.value != char:
            raise ParseError(f"expected {char!r}, found {tok.raw!r}", tok.pos)
        return tok

    def _const(self, coeff: GaussianRational) -> Table:
        if coeff.is_zero:
            return {}
        return {(0,) * self.nvars: coeff}

    def _exponent(self) -> int:
        """Integer after '^', sign already consumed by the caller."""
        tok = self.next()
        if tok.kind != "NUM" or "/" in tok.raw or "." in tok.raw:
            raise ParseError("exponent must be an integer", tok.pos)
        return int(tok.raw)

    def parse_expr(self) -> Table:
        table = self.parse_term()
        while self.peek().kind == "OP" and self.peek().value in "+-":
            op = self.next().value
            rhs = self.parse_term()
            table = _tadd(table, rhs if op == "+" else _tneg(rhs))
        return table

    def parse_term(self) -> Table:
        table = self.parse_factor()
        while self.peek().kind == "OP" and self.peek().value == "*":
            self.next()
            table = _tmul(table, self.parse_factor())
        return table

    def parse_factor(self) -> Table:
        sign = 1
        while self.peek().kind == "OP" and self.peek().value in "+-":
            if self.next().value == "-":
                sign = -sign
        table = self.parse_atom_power()
        return table if sign > 0 else _tneg(table)

    def parse_atom_power(self) -> Table:
        tok = self.next()
        if tok.kind == "NUM":
            base: Table | None = self._const(GaussianRational(tok.value))
            var_idx = None
        elif tok.kind == "IMAG":
            base = self._const(GaussianRational(0, tok.value))
            var_idx = None
        elif tok.kind == "NAME":
            if tok.value not in self.vars:
                raise ParseError(f"unknown variable {tok.value!r}", tok.pos)
            var_idx = self.vars[tok.value]
            base = None
        elif tok.kind == "OP" and tok.value == "(":
            base = self.parse_expr()
            self.expect_op(")")
            var_idx = None
        else:
            raise ParseError(f"unexpected token {tok.raw!r}", tok.pos)

        exponent = 1
        negative = False
        if self.peek().kind == "OP" and self.peek().value == "^":
            self.next()
            if self.peek().kind == "OP" and self.peek().value == "-":
                neg_tok = self.next()
                if not self.allow_negative:
                    raise ParseError("negative exponents are not allowed here", neg_tok.pos)
                if var_idx is None:
                    raise ParseError("negative exponents only apply to variables", neg_tok.pos)
                negative = True
            exponent = self._exponent()

        if var_idx is not None:
            mono = [0] * self.nvars
            mono[var_idx] = -exponent if negative else exponent
            return {tuple(mono): GaussianRational(1)}
        assert base is not None
        if exponent == 1:
            return base
        return _tpow(base, exponent, self.nvars)


def parse_table(text: str, varnames: Sequence[str], allow_negative: bool = False) -> Table:
    """Parse `text` over `varnames` into a zero-free term table."""
    if not text or text.isspace():
        raise ParseError("empty expression", 0)
    parser = _Parser(_tokenize(text), varnames, allow_negative)
    table = parser.parse_expr()
    tail = parser.peek()
    if tail.kind != "END":
        raise ParseError(f"unexpected trailing input {tail.raw!r}", tail.pos)
    return table
