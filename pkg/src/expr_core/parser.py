"""
Recursive-descent parser for the field expression grammar.

    expr     := term (("+" | "-") term)*
    term     := unary (("*" | "/") unary)*
    unary    := "-" unary | power
    power    := atom ("^" exponent)?
    exponent := INT | "-" INT | "(" "-"? INT ")"
    atom     := NUMBER | VAR | FUNC "(" expr ")" | "(" expr ")"

VAR is x1..xd (1-based), FUNC is one of sin, cos, exp, tanh. Unary minus
binds weaker than "^", so -x1^2 is -(x1^2).
"""

import math
import re
from dataclasses import dataclass
from typing import List

from ..shared.errors import ExprSyntaxError, UnknownIdentifierError
from .expressions import UNARY_FUNCTIONS, Binary, Const, Expr, Pow, Unary, Var

_TOKEN_RE = re.compile(
    r"\s*(?:"
    r"(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^()])"
    r")"
)
_VAR_RE = re.compile(r"x([1-9]\d*)")


@dataclass(frozen=True)
class Token:
    kind: str  # number | name | op | end
    text: str
    position: int


def tokenize(text: str) -> List[Token]:
    tokens: List[Token] = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        match = _TOKEN_RE.match(text, pos)
        if match is None or match.end() == pos:
            offset = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ExprSyntaxError(f"unexpected character {text[offset]!r}", offset)
        kind = match.lastgroup
        tokens.append(Token(kind, match.group(kind), match.start(kind)))
        pos = match.end()
    tokens.append(Token("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, dim: int):
        self.tokens = tokenize(text)
        self.dim = dim
        self.index = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def advance(self) -> Token:
        token = self.tokens[self.index]
        self.index += 1
        return token

    def accept(self, op: str) -> bool:
        if self.current.kind == "op" and self.current.text == op:
            self.index += 1
            return True
        return False

    def expect(self, op: str) -> None:
        if not self.accept(op):
            raise ExprSyntaxError(f"expected {op!r}", self.current.position)

    def parse(self) -> Expr:
        expr = self.expr()
        if self.current.kind != "end":
            raise ExprSyntaxError(f"unexpected {self.current.text!r}", self.current.position)
        return expr

    def expr(self) -> Expr:
        node = self.term()
        while self.current.kind == "op" and self.current.text in "+-":
            op = "add" if self.advance().text == "+" else "sub"
            node = Binary(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.current.kind == "op" and self.current.text in "*/":
            op = "mul" if self.advance().text == "*" else "div"
            node = Binary(op, node, self.unary())
        return node

    def unary(self) -> Expr:
        if self.accept("-"):
            return Unary("neg", self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.accept("^"):
            return Pow(base, self.exponent())
        return base

    def exponent(self) -> int:
        if self.accept("("):
            value = self.signed_integer()
            self.expect(")")
            return value
        return self.signed_integer()

    def signed_integer(self) -> int:
        sign = -1 if self.accept("-") else 1
        token = self.current
        if token.kind != "number" or not token.text.isdigit():
            raise ExprSyntaxError("exponent must be an integer literal", token.position)
        self.advance()
        return sign * int(token.text)

    def atom(self) -> Expr:
        token = self.current
        if token.kind == "number":
            value = float(token.text)
            if not math.isfinite(value):
                raise ExprSyntaxError(f"numeric literal {token.text} overflows", token.position)
            self.advance()
            return Const(value)
        if token.kind == "name":
            self.advance()
            if token.text in UNARY_FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Unary(token.text, arg)
            match = _VAR_RE.fullmatch(token.text)
            if match is None:
                raise UnknownIdentifierError(f"unknown identifier {token.text!r}", token.position)
            index = int(match.group(1))
            if index > self.dim:
                raise UnknownIdentifierError(
                    f"variable {token.text} exceeds state dimension {self.dim}", token.position
                )
            return Var(index)
        if self.accept("("):
            inner = self.expr()
            self.expect(")")
            return inner
        if token.kind == "end":
            raise ExprSyntaxError("unexpected end of expression", token.position)
        raise ExprSyntaxError(f"unexpected {token.text!r}", token.position)


def parse(text: str, dim: int) -> Expr:
    """Parse an expression over x1..x{dim}."""
    if dim < 1:
        raise ExprSyntaxError("state dimension must be positive", 0)
    return _Parser(text, dim).parse()
