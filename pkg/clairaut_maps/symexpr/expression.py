"""
Scalar expressions in chart coordinates.

An ``Expr`` pairs a sympy expression with the ordered coordinate names of
the chart it lives on. Differentiation is exact (sympy); evaluation goes
through ``lambdify`` on the ``math`` module, so domain violations surface as
Python arithmetic errors, which are mapped to ``DomainError``.
"""

import math
from functools import cached_property
from typing import Callable, Dict, Iterable, List, Sequence, Union

import numpy as np
import sympy

from clairaut_maps.models import DomainError

import logging
logger = logging.getLogger(__name__)

Number = Union[int, float]

_ARITHMETIC_ERRORS = (ZeroDivisionError, ValueError, OverflowError, TypeError)


def make_symbols(names: Sequence[str]) -> List[sympy.Symbol]:
    """Real sympy symbols for a list of coordinate names."""
    return [sympy.Symbol(name, real=True) for name in names]


def _as_node(value: Union['Expr', sympy.Expr, Number]) -> sympy.Expr:
    if isinstance(value, Expr):
        return value.node
    return sympy.sympify(value)


class Expr:
    """
    Immutable scalar expression over a fixed tuple of coordinate names.

    Compiled evaluators are filled lazily on first use and never change
    afterwards, so sharing an ``Expr`` between threads is safe.
    """

    def __init__(self, node: Union[sympy.Expr, Number], coords: Sequence[str]):
        self.node = sympy.sympify(node)
        self.coords = tuple(coords)

    @classmethod
    def constant(cls, value: Number, coords: Sequence[str]) -> 'Expr':
        return cls(sympy.Float(value) if isinstance(value, float) else sympy.Integer(value),
                   coords)

    @classmethod
    def coordinate(cls, index: int, coords: Sequence[str]) -> 'Expr':
        return cls(make_symbols(coords)[index], coords)

    @property
    def symbols(self) -> List[sympy.Symbol]:
        return make_symbols(self.coords)

    @property
    def is_zero(self) -> bool:
        return self.node == 0

    @cached_property
    def _compiled(self) -> Callable:
        return sympy.lambdify(self.symbols, self.node, modules='math')

    def evaluate(self, point: Sequence[float]) -> float:
        """
        Evaluate at a chart point.

        Raises:
            DomainError: on division by zero, log of a non-positive value,
                overflow, or a non-real result
        """
        if len(point) < len(self.coords):
            raise DomainError(
                f"Point of length {len(point)} given for expression over {self.coords}")
        try:
            value = self._compiled(*[float(x) for x in point[:len(self.coords)]])
        except _ARITHMETIC_ERRORS as e:
            raise DomainError(f"Cannot evaluate {self.node} at {list(point)}: {e}") from e
        if isinstance(value, complex):
            raise DomainError(f"Non-real value of {self.node} at {list(point)}")
        value = float(value)
        if not math.isfinite(value):
            raise DomainError(f"Non-finite value of {self.node} at {list(point)}")
        return value

    def differentiate(self, coord: Union[int, str]) -> 'Expr':
        """Exact partial derivative with respect to a coordinate index or name."""
        index = self.coords.index(coord) if isinstance(coord, str) else coord
        if not 0 <= index < len(self.coords):
            raise IndexError(f"Coordinate index {index} out of range for {self.coords}")
        return Expr(sympy.diff(self.node, self.symbols[index]), self.coords)

    def gradient(self) -> List['Expr']:
        return [self.differentiate(i) for i in range(len(self.coords))]

    def substitute(self, values: Dict[str, Union['Expr', Number]],
                   coords: Sequence[str] = None) -> 'Expr':
        """Replace named symbols by numbers or expressions, optionally re-homing the result."""
        mapping = {sympy.Symbol(name, real=True): _as_node(value) for name, value in values.items()}
        return Expr(self.node.xreplace(mapping), coords if coords is not None else self.coords)

    def free_names(self) -> List[str]:
        return sorted(str(s) for s in self.node.free_symbols)

    # Arithmetic builds new expressions on the same chart
    def _combine(self, other, op) -> 'Expr':
        return Expr(op(self.node, _as_node(other)), self.coords)

    def __add__(self, other):
        return self._combine(other, lambda a, b: a + b)

    def __radd__(self, other):
        return self._combine(other, lambda a, b: b + a)

    def __sub__(self, other):
        return self._combine(other, lambda a, b: a - b)

    def __rsub__(self, other):
        return self._combine(other, lambda a, b: b - a)

    def __mul__(self, other):
        return self._combine(other, lambda a, b: a * b)

    def __rmul__(self, other):
        return self._combine(other, lambda a, b: b * a)

    def __truediv__(self, other):
        return self._combine(other, lambda a, b: a / b)

    def __rtruediv__(self, other):
        return self._combine(other, lambda a, b: b / a)

    def __pow__(self, other):
        return self._combine(other, lambda a, b: a ** b)

    def __neg__(self):
        return Expr(-self.node, self.coords)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Expr):
            return NotImplemented
        return self.coords == other.coords and self.node == other.node

    def __hash__(self) -> int:
        return hash((self.node, self.coords))

    def __repr__(self) -> str:
        return f"Expr({self.node})"

    def __str__(self) -> str:
        return str(self.node)


def evaluate(e: Expr, point: Sequence[float]) -> float:
    """Module-level form of ``Expr.evaluate``."""
    return e.evaluate(point)


def differentiate(e: Expr, coord: Union[int, str]) -> Expr:
    """Module-level form of ``Expr.differentiate``."""
    return e.differentiate(coord)


class ArrayFunction:
    """
    Compiled evaluator for a nested array of expressions sharing one chart.

    Used for metric entries and their derivatives, where evaluating one
    lambdified function per point is much cheaper than one per entry.
    """

    def __init__(self, exprs: Iterable, shape: Sequence[int], coords: Sequence[str]):
        flat = [_as_node(e) for e in exprs]
        expected = int(np.prod(shape)) if len(shape) else 1
        if len(flat) != expected:
            raise ValueError(f"Expected {expected} expressions for shape {tuple(shape)}, got {len(flat)}")
        self.shape = tuple(shape)
        self.coords = tuple(coords)
        self._nodes = flat
        self._fn = sympy.lambdify(make_symbols(coords), flat, modules='math')

    def __call__(self, point: Sequence[float]) -> np.ndarray:
        try:
            values = self._fn(*[float(x) for x in point[:len(self.coords)]])
            result = np.asarray(values, dtype=float)
        except _ARITHMETIC_ERRORS as e:
            raise DomainError(f"Cannot evaluate array at {list(point)}: {e}") from e
        if not np.all(np.isfinite(result)):
            raise DomainError(f"Non-finite array value at {list(point)}")
        return result.reshape(self.shape)
