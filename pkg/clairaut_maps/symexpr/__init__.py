"""
Scalar expressions in chart coordinates: construction, parsing, exact
differentiation and compiled numeric evaluation.
"""

from .expression import ArrayFunction, Expr, differentiate, evaluate, make_symbols
from .parser import ALLOWED_FUNCTIONS, parse_expression

__all__ = [
    'Expr',
    'ArrayFunction',
    'evaluate',
    'differentiate',
    'make_symbols',
    'parse_expression',
    'ALLOWED_FUNCTIONS',
]
