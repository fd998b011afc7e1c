"""
Infix expression parser for scenario files.

Accepts ``+ - * / ^`` (``^`` is exponentiation), parentheses, numeric
literals, the functions ``exp log sin cos sqrt`` and the constant ``pi``.
Only coordinate names declared by the enclosing chart (plus any explicitly
allowed parameter names) may appear.
"""

import re
import tokenize
from typing import Optional, Sequence

import sympy
from sympy.core.function import AppliedUndef
from sympy.parsing.sympy_parser import (
    convert_xor, parse_expr, standard_transformations
)

from clairaut_maps.models import ParseError
from .expression import Expr, make_symbols

import logging
logger = logging.getLogger(__name__)

ALLOWED_FUNCTIONS = {
    'exp': sympy.exp,
    'log': sympy.log,
    'sin': sympy.sin,
    'cos': sympy.cos,
    'sqrt': sympy.sqrt,
}

_TRANSFORMATIONS = standard_transformations + (convert_xor,)
_NAME = re.compile(r'^[A-Za-z_][A-Za-z0-9_]*$')


def _global_namespace() -> dict:
    namespace = {
        'Integer': sympy.Integer,
        'Float': sympy.Float,
        'Rational': sympy.Rational,
        'Symbol': sympy.Symbol,
        'Function': sympy.Function,
        'pi': sympy.pi,
    }
    namespace.update(ALLOWED_FUNCTIONS)
    return namespace


def parse_expression(text: str, coords: Sequence[str],
                     parameters: Sequence[str] = (), path: Optional[str] = None) -> Expr:
    """
    Parse infix text into an ``Expr`` over ``coords``.

    Args:
        text: Expression text, e.g. ``"exp(2*x2)"``
        coords: Coordinate names of the chart
        parameters: Extra names allowed to remain free (bound later)
        path: Scenario location used in error messages

    Returns:
        Parsed expression over ``coords`` + ``parameters``

    Raises:
        ParseError: on syntax errors, unknown names or unknown functions
    """
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        text = repr(text)
    if not isinstance(text, str) or not text.strip():
        raise ParseError(f"Expected a non-empty expression string, got {text!r}", path=path)

    names = list(coords) + [p for p in parameters if p not in coords]
    for name in names:
        if not _NAME.match(name) or name in ALLOWED_FUNCTIONS or name == 'pi':
            raise ParseError(f"Invalid coordinate name {name!r}", path=path)
    local_dict = dict(zip(names, make_symbols(names)))

    try:
        node = parse_expr(text, local_dict=local_dict, global_dict=_global_namespace(),
                          transformations=_TRANSFORMATIONS)
    except (SyntaxError, tokenize.TokenError) as e:
        column = getattr(e, 'offset', None)
        raise ParseError(f"Malformed expression {text!r}: {e.__class__.__name__}",
                         line=1 if column is not None else None, column=column,
                         path=path) from e
    except (TypeError, ValueError, AttributeError) as e:
        raise ParseError(f"Malformed expression {text!r}: {e}", path=path) from e

    if not isinstance(node, sympy.Expr):
        raise ParseError(f"Expression {text!r} is not a scalar", path=path)

    unknown_functions = sorted(str(f.func) for f in node.atoms(AppliedUndef))
    if unknown_functions:
        raise ParseError(f"Unknown function(s) {unknown_functions} in {text!r}", path=path)

    unknown = sorted(str(s) for s in node.free_symbols if str(s) not in names)
    if unknown:
        raise ParseError(f"Undeclared symbol(s) {unknown} in {text!r}; chart declares {list(coords)}",
                         path=path)

    logger.debug(f"Parsed {text!r} -> {node}")
    return Expr(node, names)
