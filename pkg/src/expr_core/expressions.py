"""
Expression trees over the state variables x1..xd.

Nodes are immutable and hashable. Evaluation comes in two flavours: a
scalar path that reports domain problems as ExprDomainError, and a
vectorised path over a batch of states that leaves non-finite values for
the caller to inspect.
"""

import math
from dataclasses import dataclass
from typing import FrozenSet, Sequence

import numpy as np

from ..shared.errors import ExprDomainError

UNARY_FUNCTIONS = ("sin", "cos", "exp", "tanh")
BINARY_SYMBOLS = {"add": "+", "sub": "-", "mul": "*", "div": "/"}

_SCALAR_UNARY = {
    "neg": lambda a: -a,
    "sin": math.sin,
    "cos": math.cos,
    "exp": math.exp,
    "tanh": math.tanh,
}

_BATCH_UNARY = {
    "neg": np.negative,
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
    "tanh": np.tanh,
}


class Expr:
    """Base class of expression nodes."""

    def evaluate(self, x: Sequence[float]) -> float:
        raise NotImplementedError

    def evaluate_batch(self, X: np.ndarray) -> np.ndarray:
        """Evaluate on every row of X (shape (N, d)); returns shape (N,)."""
        raise NotImplementedError

    def variables(self) -> FrozenSet[int]:
        raise NotImplementedError

    def __str__(self) -> str:
        from .calculus import to_text
        return to_text(self)


@dataclass(frozen=True)
class Const(Expr):
    value: float

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ExprDomainError(f"constant {self.value!r} is not finite")

    def evaluate(self, x: Sequence[float]) -> float:
        return float(self.value)

    def evaluate_batch(self, X: np.ndarray) -> np.ndarray:
        return np.full(X.shape[0], float(self.value))

    def variables(self) -> FrozenSet[int]:
        return frozenset()


@dataclass(frozen=True)
class Var(Expr):
    index: int  # 1-based

    def evaluate(self, x: Sequence[float]) -> float:
        return float(x[self.index - 1])

    def evaluate_batch(self, X: np.ndarray) -> np.ndarray:
        return np.array(X[:, self.index - 1], dtype=float)

    def variables(self) -> FrozenSet[int]:
        return frozenset({self.index})


@dataclass(frozen=True)
class Unary(Expr):
    op: str
    arg: Expr

    def __post_init__(self):
        if self.op not in _SCALAR_UNARY:
            raise ValueError(f"unknown unary operator: {self.op}")

    def evaluate(self, x: Sequence[float]) -> float:
        a = self.arg.evaluate(x)
        try:
            value = _SCALAR_UNARY[self.op](a)
        except OverflowError:
            raise ExprDomainError(f"overflow in {self.op}({a!r})")
        return _finite(value, self.op)

    def evaluate_batch(self, X: np.ndarray) -> np.ndarray:
        with np.errstate(all="ignore"):
            return _BATCH_UNARY[self.op](self.arg.evaluate_batch(X))

    def variables(self) -> FrozenSet[int]:
        return self.arg.variables()


@dataclass(frozen=True)
class Binary(Expr):
    op: str
    left: Expr
    right: Expr

    def __post_init__(self):
        if self.op not in BINARY_SYMBOLS:
            raise ValueError(f"unknown binary operator: {self.op}")

    def evaluate(self, x: Sequence[float]) -> float:
        a = self.left.evaluate(x)
        b = self.right.evaluate(x)
        if self.op == "add":
            value = a + b
        elif self.op == "sub":
            value = a - b
        elif self.op == "mul":
            value = a * b
        else:
            if b == 0.0:
                raise ExprDomainError(f"division by zero in {self}")
            value = a / b
        return _finite(value, self.op)

    def evaluate_batch(self, X: np.ndarray) -> np.ndarray:
        a = self.left.evaluate_batch(X)
        b = self.right.evaluate_batch(X)
        with np.errstate(all="ignore"):
            if self.op == "add":
                return a + b
            if self.op == "sub":
                return a - b
            if self.op == "mul":
                return a * b
            return a / b

    def variables(self) -> FrozenSet[int]:
        return self.left.variables() | self.right.variables()


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: int

    def evaluate(self, x: Sequence[float]) -> float:
        b = self.base.evaluate(x)
        if b == 0.0 and self.exponent < 0:
            raise ExprDomainError(f"zero raised to negative power in {self}")
        try:
            value = b ** self.exponent
        except OverflowError:
            raise ExprDomainError(f"overflow in {self}")
        return _finite(value, "pow")

    def evaluate_batch(self, X: np.ndarray) -> np.ndarray:
        with np.errstate(all="ignore"):
            return np.power(self.base.evaluate_batch(X), float(self.exponent))

    def variables(self) -> FrozenSet[int]:
        return self.base.variables()


def _finite(value: float, op: str) -> float:
    if not math.isfinite(value):
        raise ExprDomainError(f"non-finite result in {op}")
    return value


ZERO = Const(0.0)
ONE = Const(1.0)


def is_const(e: Expr, value: float) -> bool:
    return isinstance(e, Const) and e.value == value


# Smart constructors used by differentiation; they only prune structural zeros and ones.

def add(a: Expr, b: Expr) -> Expr:
    if is_const(a, 0.0):
        return b
    if is_const(b, 0.0):
        return a
    return Binary("add", a, b)


def sub(a: Expr, b: Expr) -> Expr:
    if is_const(b, 0.0):
        return a
    if is_const(a, 0.0):
        return neg(b)
    return Binary("sub", a, b)


def mul(a: Expr, b: Expr) -> Expr:
    if is_const(a, 0.0) or is_const(b, 0.0):
        return ZERO
    if is_const(a, 1.0):
        return b
    if is_const(b, 1.0):
        return a
    return Binary("mul", a, b)


def div(a: Expr, b: Expr) -> Expr:
    if is_const(a, 0.0):
        return ZERO
    if is_const(b, 1.0):
        return a
    return Binary("div", a, b)


def neg(a: Expr) -> Expr:
    if is_const(a, 0.0):
        return ZERO
    return Unary("neg", a)


def power(base: Expr, exponent: int) -> Expr:
    if exponent == 0:
        return ONE
    if exponent == 1:
        return base
    return Pow(base, exponent)


def evaluate(e: Expr, x: Sequence[float]) -> float:
    """Evaluate e at the state x (scalar path)."""
    return e.evaluate(x)
