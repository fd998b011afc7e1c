"""
Single-chart Riemannian manifolds and vector fields.

A ``ChartedManifold`` holds a symmetric matrix of metric expressions and
compiles the metric together with its first and second coordinate
derivatives. Everything downstream (Levi-Civita connection, curvature,
covariant derivatives) is numeric linear algebra on those arrays.
"""

import operator
from functools import cached_property
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np
import sympy

from clairaut_maps.models import (
    DomainError, ScenarioError, SingularMetric, TangentVector
)
from clairaut_maps.symexpr import ArrayFunction, Expr

import logging
logger = logging.getLogger(__name__)

PD_TOL = 1e-10

_COMPARATORS: Dict[str, Callable[[float, float], bool]] = {
    '<=': operator.le,
    '>=': operator.ge,
    '!=': operator.ne,
    '<': operator.lt,
    '>': operator.gt,
}


def gram_schmidt(columns: np.ndarray, metric: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """
    Orthonormalize the columns of ``columns`` under ``metric``.

    Columns whose remainder after projection has norm below ``tol`` are
    dropped. Each result column is flipped so that its largest-magnitude
    component is positive.
    """
    columns = np.asarray(columns, dtype=float)
    basis: List[np.ndarray] = []
    for j in range(columns.shape[1]):
        v = columns[:, j].copy()
        for _ in range(2):
            for e in basis:
                v = v - (e @ metric @ v) * e
        norm_sq = v @ metric @ v
        if norm_sq <= tol * tol:
            continue
        v = v / np.sqrt(norm_sq)
        if v[int(np.argmax(np.abs(v)))] < 0:
            v = -v
        basis.append(v)
    if not basis:
        return np.zeros((columns.shape[0], 0))
    return np.column_stack(basis)


def orthogonal_complement(basis: np.ndarray, metric: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Orthonormal basis of the metric-orthogonal complement of span(basis)."""
    dim = metric.shape[0]
    stacked = np.hstack([basis, np.eye(dim)]) if basis.size else np.eye(dim)
    full = gram_schmidt(stacked, metric, tol)
    return full[:, basis.shape[1]:]


def projector(basis: np.ndarray, metric: np.ndarray) -> np.ndarray:
    """Metric-orthogonal projector onto span of an orthonormal ``basis``."""
    if basis.shape[1] == 0:
        return np.zeros_like(metric)
    return basis @ basis.T @ metric


class DomainConstraint:
    """An inequality ``lhs <op> rhs`` that admissible chart points satisfy."""

    def __init__(self, lhs: Expr, op: str, rhs: Expr, text: str = ""):
        if op not in _COMPARATORS:
            raise ScenarioError(f"Unsupported comparison {op!r}")
        self.lhs = lhs
        self.op = op
        self.rhs = rhs
        self.text = text or f"{lhs} {op} {rhs}"

    def satisfied(self, point: Sequence[float]) -> bool:
        try:
            return _COMPARATORS[self.op](self.lhs.evaluate(point), self.rhs.evaluate(point))
        except DomainError:
            return False

    def __repr__(self) -> str:
        return f"DomainConstraint({self.text})"


class VectorField:
    """A vector field given by one expression per chart coordinate."""

    def __init__(self, components: Sequence[Expr], coords: Sequence[str], name: str = ""):
        self.coords = tuple(coords)
        if len(components) != len(self.coords):
            raise ScenarioError(
                f"Vector field {name!r} has {len(components)} components on a {len(self.coords)}-dim chart")
        self.components = tuple(components)
        self.name = name

    @classmethod
    def zero(cls, coords: Sequence[str], name: str = "zero") -> 'VectorField':
        return cls([Expr.constant(0, coords) for _ in coords], coords, name)

    @classmethod
    def coordinate(cls, index: int, coords: Sequence[str], name: str = "") -> 'VectorField':
        comps = [Expr.constant(1 if k == index else 0, coords) for k in range(len(coords))]
        return cls(comps, coords, name or f"d/d{coords[index]}")

    @classmethod
    def gradient_of(cls, f: Expr, metric: Sequence[Sequence[Expr]], name: str = "") -> 'VectorField':
        """Symbolic metric gradient, for fields that must be differentiated again."""
        g = sympy.Matrix([[entry.node for entry in row] for row in metric])
        df = sympy.Matrix([d.node for d in f.gradient()])
        comps = g.inv() * df
        return cls([Expr(c, f.coords) for c in comps], f.coords, name or f"grad({f})")

    @property
    def dim(self) -> int:
        return len(self.coords)

    @cached_property
    def _value(self) -> ArrayFunction:
        return ArrayFunction(self.components, (self.dim,), self.coords)

    @cached_property
    def _jacobian(self) -> ArrayFunction:
        # entry [k, i] = d Z^k / d x^i
        entries = [c.differentiate(i) for c in self.components for i in range(self.dim)]
        return ArrayFunction(entries, (self.dim, self.dim), self.coords)

    def value(self, point: Sequence[float]) -> np.ndarray:
        return self._value(point)

    def jacobian(self, point: Sequence[float]) -> np.ndarray:
        return self._jacobian(point)

    def transformed(self, matrix: Sequence[Sequence[Expr]], name: str = "") -> 'VectorField':
        """The field p ↦ A(p)·Z(p) for an expression matrix A on the same chart."""
        comps = []
        for row in matrix:
            total = Expr.constant(0, self.coords)
            for entry, comp in zip(row, self.components):
                total = total + entry * comp
            comps.append(total)
        return VectorField(comps, self.coords, name or f"A.{self.name}")

    def substitute(self, values: Dict[str, float]) -> 'VectorField':
        return VectorField([c.substitute(values, self.coords) for c in self.components],
                           self.coords, self.name)

    def __repr__(self) -> str:
        return f"VectorField({self.name}: {[str(c) for c in self.components]})"


class ChartedManifold:
    """
    A Riemannian manifold covered by a single coordinate chart.

    The metric is a dim×dim matrix of expressions that must be symmetric as
    trees. Positive definiteness is checked lazily at every evaluation
    point. ``parameters`` names extra symbols that may occur in the metric
    and must be bound with ``bind`` before any numeric use.
    """

    def __init__(self, name: str, coords: Sequence[str], metric: Sequence[Sequence[Expr]],
                 domain: Sequence[DomainConstraint] = (), parameters: Sequence[str] = (),
                 pd_tol: float = PD_TOL):
        self.name = name
        self.coords = tuple(coords)
        self.dim = len(self.coords)
        self.parameters = tuple(parameters)
        self.domain = tuple(domain)
        self.pd_tol = pd_tol
        self.logger = logging.getLogger(f"{__name__}.ChartedManifold")

        if self.dim == 0:
            raise ScenarioError(f"Manifold {name!r} has no coordinates")
        if len(metric) != self.dim or any(len(row) != self.dim for row in metric):
            raise ScenarioError(f"Metric of {name!r} must be {self.dim}x{self.dim}")
        for i in range(self.dim):
            for j in range(i + 1, self.dim):
                if metric[i][j].node != metric[j][i].node:
                    raise ScenarioError(
                        f"Metric of {name!r} is not symmetric at ({i + 1},{j + 1})")
        self.metric_exprs = tuple(tuple(row) for row in metric)

    # Compiled arrays

    def _require_bound(self):
        if self.parameters:
            raise ScenarioError(
                f"Manifold {self.name!r} has unbound metric parameters {list(self.parameters)}")

    @cached_property
    def _metric_fn(self) -> ArrayFunction:
        self._require_bound()
        entries = [self.metric_exprs[i][j] for i in range(self.dim) for j in range(self.dim)]
        return ArrayFunction(entries, (self.dim, self.dim), self.coords)

    @cached_property
    def _metric_derivatives(self) -> Tuple[ArrayFunction, ArrayFunction]:
        self._require_bound()
        n = self.dim
        first: Dict[Tuple[int, int, int], Expr] = {}
        second: Dict[Tuple[int, int, int, int], Expr] = {}
        for i in range(n):
            for j in range(i, n):
                entry = self.metric_exprs[i][j]
                for k in range(n):
                    d = entry.differentiate(k)
                    first[(k, i, j)] = first[(k, j, i)] = d
                    for l in range(n):
                        dd = d.differentiate(l)
                        second[(l, k, i, j)] = second[(l, k, j, i)] = dd
        dg = ArrayFunction([first[(k, i, j)] for k in range(n) for i in range(n) for j in range(n)],
                           (n, n, n), self.coords)
        ddg = ArrayFunction([second[(l, k, i, j)] for l in range(n) for k in range(n)
                             for i in range(n) for j in range(n)],
                            (n, n, n, n), self.coords)
        return dg, ddg

    # Metric

    def contains(self, point: Sequence[float]) -> bool:
        return all(c.satisfied(point) for c in self.domain)

    def metric(self, point: Sequence[float]) -> np.ndarray:
        """Metric matrix at ``point``; raises SingularMetric unless positive definite."""
        g = self._metric_fn(point)
        eigenvalues = np.linalg.eigvalsh(g)
        if eigenvalues[0] <= self.pd_tol:
            raise SingularMetric(
                f"Metric of {self.name!r} not positive definite at {list(point)} "
                f"(min eigenvalue {eigenvalues[0]:.3e})")
        return g

    def inverse_metric(self, point: Sequence[float]) -> np.ndarray:
        try:
            return np.linalg.inv(self.metric(point))
        except np.linalg.LinAlgError as e:
            raise SingularMetric(f"Cannot invert metric of {self.name!r} at {list(point)}") from e

    def metric_derivative(self, point: Sequence[float]) -> np.ndarray:
        """Array [k, i, j] = ∂_k g_ij."""
        return self._metric_derivatives[0](point)

    def metric_second_derivative(self, point: Sequence[float]) -> np.ndarray:
        """Array [l, k, i, j] = ∂_l ∂_k g_ij."""
        return self._metric_derivatives[1](point)

    def inner(self, point: Sequence[float], u: np.ndarray, v: np.ndarray) -> float:
        return float(np.asarray(u) @ self.metric(point) @ np.asarray(v))

    def norm(self, point: Sequence[float], v: np.ndarray) -> float:
        return float(np.sqrt(max(self.inner(point, v, v), 0.0)))

    def orthonormal_frame(self, point: Sequence[float]) -> np.ndarray:
        """Gram–Schmidt of the coordinate basis in declaration order (columns)."""
        return gram_schmidt(np.eye(self.dim), self.metric(point))

    # Connection and curvature

    def _lowered_christoffel(self, point: Sequence[float]) -> np.ndarray:
        dg = self.metric_derivative(point)
        # [l, i, j] = ½(∂_i g_jl + ∂_j g_il − ∂_l g_ij)
        return 0.5 * (np.einsum('ijl->lij', dg) + np.einsum('jil->lij', dg) - dg)

    def christoffel(self, point: Sequence[float]) -> np.ndarray:
        """Array [k, i, j] = Γ^k_ij of the Levi-Civita connection."""
        gamma = np.einsum('kl,lij->kij', self.inverse_metric(point), self._lowered_christoffel(point))
        return 0.5 * (gamma + np.transpose(gamma, (0, 2, 1)))

    def christoffel_derivative(self, point: Sequence[float]) -> np.ndarray:
        """Array [m, k, i, j] = ∂_m Γ^k_ij, from exact metric derivatives."""
        ginv = self.inverse_metric(point)
        dg = self.metric_derivative(point)
        ddg = self.metric_second_derivative(point)
        lowered = self._lowered_christoffel(point)
        d_lowered = 0.5 * (np.einsum('mijl->mlij', ddg) + np.einsum('mjil->mlij', ddg)
                           - ddg)
        d_ginv = -np.einsum('ka,mab,bl->mkl', ginv, dg, ginv)
        d_gamma = (np.einsum('mkl,lij->mkij', d_ginv, lowered)
                   + np.einsum('kl,mlij->mkij', ginv, d_lowered))
        return 0.5 * (d_gamma + np.transpose(d_gamma, (0, 1, 3, 2)))

    def riemann(self, point: Sequence[float]) -> np.ndarray:
        """Array [l, i, j, k] = R^l_ijk = ∂_jΓ^l_ik − ∂_kΓ^l_ij + Γ^l_jm Γ^m_ik − Γ^l_km Γ^m_ij."""
        gamma = self.christoffel(point)
        d_gamma = self.christoffel_derivative(point)
        return (np.einsum('jlik->lijk', d_gamma) - np.einsum('klij->lijk', d_gamma)
                + np.einsum('ljm,mik->lijk', gamma, gamma)
                - np.einsum('lkm,mij->lijk', gamma, gamma))

    def lowered_riemann(self, point: Sequence[float]) -> np.ndarray:
        """Array [a, i, j, k] = g_al R^l_ijk."""
        return np.einsum('al,lijk->aijk', self.metric(point), self.riemann(point))

    def ricci(self, point: Sequence[float]) -> np.ndarray:
        """Ric_ik = R^j_ijk, symmetrized."""
        ric = np.einsum('jijk->ik', self.riemann(point))
        return 0.5 * (ric + ric.T)

    def scalar_curvature(self, point: Sequence[float]) -> float:
        return float(np.einsum('ij,ij->', self.inverse_metric(point), self.ricci(point)))

    def sectional_curvature(self, point: Sequence[float], x: np.ndarray, y: np.ndarray) -> float:
        """g(R(X,Y)Y, X) / (|X|²|Y|² − g(X,Y)²)."""
        g = self.metric(point)
        r_xyy = np.einsum('lijk,i,j,k->l', self.riemann(point), y, x, y)
        area = (x @ g @ x) * (y @ g @ y) - (x @ g @ y) ** 2
        if area <= 0:
            raise ValueError("Sectional curvature needs linearly independent vectors")
        return float((r_xyy @ g @ x) / area)

    def covariant_derivative(self, point: Sequence[float], field: VectorField,
                             direction: np.ndarray) -> np.ndarray:
        """(∇_X Z)^k = X^i (∂_i Z^k + Γ^k_ij Z^j)."""
        nabla_z = self.field_covariant_jacobian(point, field)
        return nabla_z @ np.asarray(direction, dtype=float)

    def field_covariant_jacobian(self, point: Sequence[float], field: VectorField) -> np.ndarray:
        """Matrix [k, i] = ∂_i Z^k + Γ^k_ij Z^j."""
        return field.jacobian(point) + np.einsum('kij,j->ki', self.christoffel(point),
                                                 field.value(point))

    def connection_on_vectors(self, point: Sequence[float], u: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Γ(u, v)^k: covariant derivative of the constant-coefficient extension of v along u."""
        return np.einsum('kij,i,j->k', self.christoffel(point), u, v)

    # Variants

    def bind(self, values: Dict[str, float]) -> 'ChartedManifold':
        """Substitute numeric values for metric parameters."""
        missing = [p for p in self.parameters if p not in values]
        if missing:
            raise ScenarioError(f"No values for metric parameters {missing} of {self.name!r}")
        subs = {p: float(values[p]) for p in self.parameters}
        metric = [[entry.substitute(subs, self.coords) for entry in row] for row in self.metric_exprs]
        return ChartedManifold(self.name, self.coords, metric, self.domain, (), self.pd_tol)

    def tangent(self, point: Sequence[float], components: Sequence[float]) -> TangentVector:
        components = np.asarray(components, dtype=float)
        if components.shape != (self.dim,):
            raise ValueError(f"Tangent vector on {self.name!r} needs {self.dim} components")
        return TangentVector(np.asarray(point, dtype=float), components)

    def __repr__(self) -> str:
        return f"ChartedManifold({self.name}, coords={list(self.coords)})"
