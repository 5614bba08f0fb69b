"""
Expression Core Module

Parsing, evaluation and symbolic differentiation of vector field entries.
"""

from .calculus import diff, to_text
from .expressions import Binary, Const, Expr, Pow, Unary, Var, evaluate
from .parser import parse

__all__ = [
    "Expr",
    "Const",
    "Var",
    "Unary",
    "Binary",
    "Pow",
    "parse",
    "evaluate",
    "diff",
    "to_text",
]
