"""Symbolic differentiation and printing of expression trees."""

import math
from functools import singledispatch

from .expressions import (
    BINARY_SYMBOLS,
    Binary,
    Const,
    Expr,
    ONE,
    Pow,
    Unary,
    Var,
    ZERO,
    add,
    div,
    mul,
    neg,
    power,
    sub,
)


@singledispatch
def diff(e: Expr, var_index: int) -> Expr:
    """Partial derivative of e with respect to x_{var_index} (1-based)."""
    raise NotImplementedError(f"cannot differentiate {type(e).__name__}")


@diff.register(Const)
def _(e: Const, var_index: int) -> Expr:
    return ZERO


@diff.register(Var)
def _(e: Var, var_index: int) -> Expr:
    return ONE if e.index == var_index else ZERO


@diff.register(Unary)
def _(e: Unary, var_index: int) -> Expr:
    da = diff(e.arg, var_index)
    if da == ZERO:
        return ZERO
    if e.op == "neg":
        return neg(da)
    if e.op == "sin":
        return mul(Unary("cos", e.arg), da)
    if e.op == "cos":
        return neg(mul(Unary("sin", e.arg), da))
    if e.op == "exp":
        return mul(e, da)
    # tanh' = 1 - tanh^2
    return mul(sub(ONE, power(e, 2)), da)


@diff.register(Binary)
def _(e: Binary, var_index: int) -> Expr:
    da = diff(e.left, var_index)
    db = diff(e.right, var_index)
    if e.op == "add":
        return add(da, db)
    if e.op == "sub":
        return sub(da, db)
    if e.op == "mul":
        return add(mul(da, e.right), mul(e.left, db))
    numerator = sub(mul(da, e.right), mul(e.left, db))
    return div(numerator, power(e.right, 2))


@diff.register(Pow)
def _(e: Pow, var_index: int) -> Expr:
    db = diff(e.base, var_index)
    if db == ZERO or e.exponent == 0:
        return ZERO
    return mul(mul(Const(float(e.exponent)), power(e.base, e.exponent - 1)), db)


@singledispatch
def to_text(e: Expr) -> str:
    """Fully parenthesised text that parse() reads back to the same tree."""
    raise NotImplementedError(f"cannot print {type(e).__name__}")


@to_text.register(Const)
def _(e: Const) -> str:
    value = float(e.value)
    if value < 0 or (value == 0.0 and math.copysign(1.0, value) < 0):
        return f"(-{abs(value)!r})"
    return repr(value)


@to_text.register(Var)
def _(e: Var) -> str:
    return f"x{e.index}"


@to_text.register(Unary)
def _(e: Unary) -> str:
    if e.op == "neg":
        return f"(-{to_text(e.arg)})"
    return f"{e.op}({to_text(e.arg)})"


@to_text.register(Binary)
def _(e: Binary) -> str:
    return f"({to_text(e.left)} {BINARY_SYMBOLS[e.op]} {to_text(e.right)})"


@to_text.register(Pow)
def _(e: Pow) -> str:
    exponent = str(e.exponent) if e.exponent >= 0 else f"(-{abs(e.exponent)})"
    return f"({to_text(e.base)})^{exponent}"
