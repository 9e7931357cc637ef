"""Text grammar for polynomial symbols.

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('+' | '-') unary | power
    power  := atom ('^' INT)?
    atom   := NUMBER | 'x'INDEX | 'i' | '(' expr ')'

Variables are ``x1`` .. ``xN``.  ``**`` is accepted as a synonym for ``^``.
Numbers are integers or decimals and are converted exactly; division is only
allowed by nonzero constants, so ``3/2*x1`` is the rational literal 3/2 times x1.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .polynomial import GaussQ, Polynomial

MAX_EXPONENT = 2**16

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d*)?|\.\d+)|(?P<var>x(?P<idx>\d+))|(?P<imag>i)(?![A-Za-z0-9_])"
    r"|(?P<op>\*\*|[-+*/^()]))"
)


class PolynomialSyntaxError(ValueError):
    """Raised for malformed polynomial text; ``position`` is a 0-based offset."""

    def __init__(self, message: str, position: int, text: str = ""):
        self.position = position
        self.text = text
        super().__init__(f"{message} at position {position}")


def _tokenize(text: str):
    pos = 0
    tokens = []
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise PolynomialSyntaxError(f"unexpected character {text[pos]!r}", pos, text)
        start = m.start() + (len(m.group(0)) - len(m.group(0).lstrip()))
        if m.group("num") is not None:
            tokens.append(("num", m.group("num"), start))
        elif m.group("var") is not None:
            idx = int(m.group("idx"))
            if idx < 1:
                raise PolynomialSyntaxError("variable indices start at x1", start, text)
            tokens.append(("var", idx, start))
        elif m.group("imag") is not None:
            tokens.append(("imag", "i", start))
        else:
            op = m.group("op")
            tokens.append(("op", "^" if op == "**" else op, start))
        pos = m.end()
    tokens.append(("end", None, n))
    return tokens


class _Parser:
    def __init__(self, text: str, nvars: int):
        self.text = text
        self.nvars = nvars
        self.tokens = _tokenize(text)
        self.k = 0

    def peek(self):
        return self.tokens[self.k]

    def take(self):
        tok = self.tokens[self.k]
        self.k += 1
        return tok

    def error(self, message, tok=None):
        tok = tok or self.peek()
        raise PolynomialSyntaxError(message, tok[2], self.text)

    def expect_op(self, op):
        tok = self.take()
        if tok[0] != "op" or tok[1] != op:
            self.error(f"expected {op!r}", tok)

    def parse(self) -> Polynomial:
        if self.peek()[0] == "end":
            self.error("empty expression")
        result = self.expr()
        if self.peek()[0] != "end":
            self.error(f"unexpected token {self.peek()[1]!r}")
        return result

    def expr(self):
        value = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self):
        value = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            tok = self.take()
            rhs = self.unary()
            if tok[1] == "*":
                value = value * rhs
            else:
                if rhs.degree > 0 or rhs.is_zero:
                    self.error("division is only allowed by a nonzero constant", tok)
                c = rhs.coefficient((0,) * self.nvars)
                value = value.map_coefficients(lambda a: a / c)
        return value

    def unary(self):
        tok = self.peek()
        if tok[0] == "op" and tok[1] in "+-":
            self.take()
            operand = self.unary()
            return -operand if tok[1] == "-" else operand
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            tok = self.take()
            if tok[0] != "num" or not tok[1].isdigit():
                self.error("exponent must be a nonnegative integer literal", tok)
            e = int(tok[1])
            if e > MAX_EXPONENT:
                self.error(f"exponent {e} exceeds {MAX_EXPONENT}", tok)
            return base**e
        return base

    def atom(self):
        tok = self.take()
        kind, value, _ = tok
        if kind == "num":
            return Polynomial.constant(Fraction(value), self.nvars)
        if kind == "var":
            return Polynomial.variable(value - 1, self.nvars)
        if kind == "imag":
            return Polynomial.constant(GaussQ(0, 1), self.nvars)
        if kind == "op" and value == "(":
            inner = self.expr()
            self.expect_op(")")
            return inner
        if kind == "end":
            self.error("unexpected end of input", tok)
        self.error(f"unexpected token {value!r}", tok)


def parse_polynomial(text: str, nvars: int | None = None) -> Polynomial:
    """Parse ``text`` into an exact :class:`Polynomial`.

    ``nvars`` defaults to the largest variable index that appears (at least 1);
    pass it explicitly to embed the symbol in a larger space, e.g.
    ``parse_polynomial("x1^2 + x2^2", nvars=3)``.
    """
    tokens = _tokenize(text)
    used = max((t[1] for t in tokens if t[0] == "var"), default=1)
    if nvars is None:
        nvars = used
    elif used > nvars:
        pos = next(t[2] for t in tokens if t[0] == "var" and t[1] > nvars)
        raise PolynomialSyntaxError(f"variable x{used} exceeds nvars={nvars}", pos, text)
    return _Parser(text, nvars).parse()
