"""
Parametrized leaves of a distribution on a charted manifold.

A leaf is given by an embedding φ(s; q) whose expressions use the leaf
parameters ``s`` and the coordinates of a base point ``q``, together with
the parameter values s(q) at which the leaf passes through ``q``. The
induced metric is the pullback φ*g, built symbolically so that the leaf
is an ordinary ``ChartedManifold``.
"""

from functools import lru_cache
from typing import Sequence, Tuple

import numpy as np
from scipy import linalg

from clairaut_maps.models import ScenarioError
from clairaut_maps.symexpr import ArrayFunction, Expr

from .manifold import ChartedManifold

import logging
logger = logging.getLogger(__name__)

PASS_THROUGH_TOL = 1e-9
LEAF_CACHE_SIZE = 64


class Leaf:
    """An integral submanifold family of a distribution on ``manifold``."""

    def __init__(self, name: str, manifold: ChartedManifold, params: Sequence[str],
                 embedding: Sequence[Expr], base: Sequence[Expr]):
        """
        Initialize the leaf family.

        Args:
            name: Leaf name used in reports
            manifold: Ambient chart (metric parameters already bound)
            params: Leaf parameter names, disjoint from the ambient coordinates
            embedding: One expression per ambient coordinate over params + coords
            base: One expression per parameter over the ambient coordinates
        """
        self.name = name
        self.manifold = manifold
        self.params = tuple(params)
        self.embedding = tuple(embedding)
        self.base = tuple(base)
        self.logger = logging.getLogger(f"{__name__}.Leaf")
        self._leaf_at = lru_cache(maxsize=LEAF_CACHE_SIZE)(self._build_leaf)

        clash = set(self.params) & set(manifold.coords)
        if clash:
            raise ScenarioError(f"Leaf {name!r} parameters {sorted(clash)} clash with coordinates")
        if len(self.embedding) != manifold.dim:
            raise ScenarioError(f"Leaf {name!r} embedding needs {manifold.dim} components")
        if len(self.base) != len(self.params):
            raise ScenarioError(f"Leaf {name!r} base needs {len(self.params)} components")

    @property
    def dim(self) -> int:
        return len(self.params)

    def with_manifold(self, manifold: ChartedManifold) -> 'Leaf':
        """The same leaf family over a rebound ambient chart."""
        return Leaf(self.name, manifold, self.params, self.embedding, self.base)

    def through(self, q: Sequence[float]) -> Tuple[ChartedManifold, np.ndarray, np.ndarray]:
        """
        The leaf through ``q``.

        Returns:
            (induced manifold, parameter point s(q), n×k tangent matrix ∂φ/∂s at s(q))

        Raises:
            ScenarioError: if φ(s(q); q) does not reproduce ``q``
        """
        return self._leaf_at(tuple(float(x) for x in q))

    def _build_leaf(self, key: Tuple[float, ...]) -> Tuple[ChartedManifold, np.ndarray, np.ndarray]:
        values = dict(zip(self.manifold.coords, key))
        phi = [e.substitute(values, self.params) for e in self.embedding]
        s0 = np.array([b.evaluate(key) for b in self.base])
        image = np.array([c.evaluate(s0) for c in phi])
        if np.max(np.abs(image - np.asarray(key))) > PASS_THROUGH_TOL * max(1.0, float(np.max(np.abs(key)))):
            raise ScenarioError(f"Leaf {self.name!r} does not pass through {list(key)}")

        k = self.dim
        tangents = [[c.differentiate(a) for a in range(k)] for c in phi]
        ambient = {name: comp for name, comp in zip(self.manifold.coords, phi)}
        pulled = [[entry.substitute(ambient, self.params) for entry in row]
                  for row in self.manifold.metric_exprs]
        metric = []
        for a in range(k):
            row = []
            for b in range(k):
                total = Expr.constant(0, self.params)
                for i in range(self.manifold.dim):
                    for j in range(self.manifold.dim):
                        total = total + tangents[i][a] * pulled[i][j] * tangents[j][b]
                row.append(total)
            metric.append(row)
        # Symmetrize as trees so the chart accepts the metric
        for a in range(k):
            for b in range(a + 1, k):
                metric[b][a] = metric[a][b]

        induced = ChartedManifold(f"{self.name}@{list(key)}", self.params, metric)
        jac = ArrayFunction([t for row in tangents for t in row], (self.manifold.dim, k), self.params)(s0)
        self.logger.debug(f"Leaf {self.name} through {list(key)}: dim {k}")
        return induced, s0, jac

    def ricci(self, q: Sequence[float], u: np.ndarray, w: np.ndarray) -> float:
        """Ricci of the leaf through ``q`` on ambient vectors tangent to it."""
        induced, s0, jac = self.through(q)
        a = self._leaf_components(jac, u)
        b = self._leaf_components(jac, w)
        return float(a @ induced.ricci(s0) @ b)

    def scalar_curvature(self, q: Sequence[float]) -> float:
        induced, s0, _ = self.through(q)
        return induced.scalar_curvature(s0)

    def tangency_defect(self, q: Sequence[float], vectors: np.ndarray) -> float:
        """Largest Euclidean distance of the columns of ``vectors`` from the leaf tangent space."""
        _, _, jac = self.through(q)
        worst = 0.0
        for col in np.asarray(vectors, dtype=float).T:
            coeffs = self._leaf_components(jac, col)
            worst = max(worst, float(np.linalg.norm(jac @ coeffs - col)))
        return worst

    @staticmethod
    def _leaf_components(jac: np.ndarray, vector: np.ndarray) -> np.ndarray:
        coeffs, *_ = linalg.lstsq(jac, np.asarray(vector, dtype=float))
        return coeffs

    def __repr__(self) -> str:
        return f"Leaf({self.name}, params={list(self.params)})"
