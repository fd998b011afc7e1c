"""
Smooth maps between charted manifolds.

A ``SmoothMap`` holds one expression per target coordinate, written in the
source coordinates, and compiles the Jacobian and the second partials of the
components. The pointwise split of tangent spaces into kernel, horizontal,
range and normal parts is derived from a singular value decomposition of the
Jacobian.
"""

from functools import cached_property, lru_cache
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from clairaut_maps.checks.tolerance import ResidualTolerance
from clairaut_maps.geometry import ChartedManifold, gram_schmidt, orthogonal_complement
from clairaut_maps.models import (
    CheckResult, FrameSplit, RankDeficiencyAmbiguous, ScenarioError, SplitUnavailable
)
from clairaut_maps.symexpr import ArrayFunction, Expr

import logging
logger = logging.getLogger(__name__)

RANK_TOL = 1e-10
AMBIGUITY_FACTOR = 100.0
NEIGHBOURHOOD_STEP = 1e-6
BOUND_TARGET_CACHE_SIZE = 128


class SmoothMap:
    """
    F: (M, g1) -> (N, g2) given by component expressions in source coordinates.

    The target metric may carry parameters named after source coordinates
    (literal metric reading); ``target_at`` binds them from the source point.
    """

    def __init__(self, name: str, source: ChartedManifold, target: ChartedManifold,
                 components: Sequence[Expr], rank_tol: float = RANK_TOL,
                 ambiguity_factor: float = AMBIGUITY_FACTOR):
        if len(components) != target.dim:
            raise ScenarioError(
                f"Map {name!r} has {len(components)} components but target {target.name!r} "
                f"has dimension {target.dim}")
        unknown = sorted({n for c in components for n in c.free_names()} - set(source.coords))
        if unknown:
            raise ScenarioError(f"Map {name!r} uses names {unknown} outside source coordinates")
        foreign = [p for p in target.parameters if p not in source.coords]
        if foreign:
            raise ScenarioError(
                f"Target metric of {name!r} has parameters {foreign} that are not source coordinates")

        self.name = name
        self.source = source
        self.target = target
        self.components = tuple(Expr(c.node, source.coords) for c in components)
        self.rank_tol = rank_tol
        self.ambiguity_factor = ambiguity_factor
        self.logger = logging.getLogger(f"{__name__}.SmoothMap")
        self._bound_target = lru_cache(maxsize=BOUND_TARGET_CACHE_SIZE)(self._bind_target)

    @property
    def m(self) -> int:
        return self.source.dim

    @property
    def n(self) -> int:
        return self.target.dim

    @cached_property
    def _value_fn(self) -> ArrayFunction:
        return ArrayFunction(self.components, (self.n,), self.source.coords)

    @cached_property
    def _jacobian_fn(self) -> ArrayFunction:
        entries = [c.differentiate(i) for c in self.components for i in range(self.m)]
        return ArrayFunction(entries, (self.n, self.m), self.source.coords)

    @cached_property
    def _hessian_fn(self) -> ArrayFunction:
        entries = [c.differentiate(i).differentiate(j)
                   for c in self.components for i in range(self.m) for j in range(self.m)]
        return ArrayFunction(entries, (self.n, self.m, self.m), self.source.coords)

    def __call__(self, point: Sequence[float]) -> np.ndarray:
        return self._value_fn(point)

    def differential(self, point: Sequence[float]) -> np.ndarray:
        """Jacobian matrix, entry [γ, i] = ∂F^γ/∂x^i."""
        return self._jacobian_fn(point)

    def component_hessians(self, point: Sequence[float]) -> np.ndarray:
        """Array [γ, i, j] = ∂_i∂_j F^γ."""
        return self._hessian_fn(point)

    def push_forward(self, point: Sequence[float], vector: np.ndarray) -> np.ndarray:
        return self.differential(point) @ np.asarray(vector, dtype=float)

    def target_at(self, point: Sequence[float]) -> ChartedManifold:
        """The target manifold with any source-coordinate parameters bound at ``point``."""
        if not self.target.parameters:
            return self.target
        return self._bound_target(tuple(float(x) for x in point))

    def _bind_target(self, key: Tuple[float, ...]) -> ChartedManifold:
        return self.target.bind(dict(zip(self.source.coords, key)))

    def target_metric(self, point: Sequence[float]) -> np.ndarray:
        """g2 at F(point)."""
        return self.target_at(point).metric(self(point))

    # Rank and subspaces

    def singular_values(self, point: Sequence[float]) -> np.ndarray:
        return linalg.svd(self.differential(point), compute_uv=False)

    def rank(self, point: Sequence[float]) -> int:
        """
        Numeric rank of the differential.

        Raises:
            RankDeficiencyAmbiguous: if a singular value lies in
                [rank_tol, ambiguity_factor·rank_tol]
        """
        values = self.singular_values(point)
        upper = self.ambiguity_factor * self.rank_tol
        ambiguous = values[(values >= self.rank_tol) & (values <= upper)]
        if ambiguous.size:
            raise RankDeficiencyAmbiguous(
                f"Map {self.name!r} at {list(point)}: singular value {ambiguous[0]:.3e} "
                f"inside ambiguity band [{self.rank_tol:.0e}, {upper:.0e}]")
        return int(np.sum(values > upper))

    def check_constant_rank(self, point: Sequence[float], step: float = NEIGHBOURHOOD_STEP) -> int:
        """
        Rank at ``point``, confirmed at coordinate-perturbed neighbours in the domain.

        Raises:
            SplitUnavailable: if the rank differs at a neighbour
        """
        rank = self.rank(point)
        base = np.asarray(point, dtype=float)
        for i in range(self.m):
            for sign in (1.0, -1.0):
                neighbour = base.copy()
                neighbour[i] += sign * step
                if not self.source.contains(neighbour):
                    continue
                if self.rank(neighbour) != rank:
                    raise SplitUnavailable(
                        f"Rank of {self.name!r} changes near {list(point)} "
                        f"({rank} vs {self.rank(neighbour)})")
        return rank

    def split(self, point: Sequence[float], verify_rank: bool = True) -> FrameSplit:
        """
        Orthonormal bases of kerF*, (kerF*)⊥, rangeF*, (rangeF*)⊥ at ``point``.

        Kernel and horizontal bases are orthonormal under g1 at the point,
        range and normal bases under g2 at F(point).
        """
        p = np.asarray(point, dtype=float)
        rank = self.check_constant_rank(p) if verify_rank else self.rank(p)
        jac = self.differential(p)
        g1 = self.source.metric(p)
        g2 = self.target_metric(p)

        if rank < self.m:
            kernel = gram_schmidt(_null_basis(jac, self.m - rank), g1)
        else:
            kernel = np.zeros((self.m, 0))
        horizontal = orthogonal_complement(kernel, g1)
        image = gram_schmidt(jac @ horizontal, g2)
        normal = orthogonal_complement(image, g2)

        split = FrameSplit(
            base_point=p,
            target_point=self(p),
            kernel=kernel,
            horizontal=horizontal,
            range=image,
            normal=normal,
            singular_values=self.singular_values(p)
        )
        self.logger.debug(f"Split of {self.name} at {list(p)}: rank {split.rank}, "
                          f"kernel {split.kernel_dim}, normal {split.normal_dim}")
        return split

    def adjoint(self, point: Sequence[float], vector: np.ndarray) -> np.ndarray:
        """*F*V, defined by g1(*F*V, X) = g2(V, F*X) for all X."""
        jac = self.differential(point)
        return self.source.inverse_metric(point) @ jac.T @ self.target_metric(point) @ vector

    def isometry_defect(self, point: Sequence[float], split: Optional[FrameSplit] = None) -> float:
        """max |g2(F*Xa, F*Xb) − δab| over an orthonormal horizontal basis."""
        split = split or self.split(point, verify_rank=False)
        images = self.differential(point) @ split.horizontal
        gram = images.T @ self.target_metric(point) @ images
        return float(np.max(np.abs(gram - np.eye(split.rank)))) if split.rank else 0.0

    def check_riemannian(self, points: Sequence[Sequence[float]],
                         tolerance: float = 1e-8) -> CheckResult:
        """Isometry of F* restricted to (kerF*)⊥ at each sample point."""
        matcher = ResidualTolerance(tolerance)
        defects = [self.isometry_defect(p) for p in points]
        summary = matcher.summarize('isometry_defect', defects)
        self.logger.info(f"Riemannian check of {self.name}: max defect {summary.max:.3e}")
        return matcher.build_result('riemannian', 'Eq (2.1): g2(F*X, F*Y) = g1(X, Y)', [summary],
                                    values={'map': self.name})

    def __repr__(self) -> str:
        return f"SmoothMap({self.name}: {self.source.name} -> {self.target.name})"


def _null_basis(jac: np.ndarray, dim: int) -> np.ndarray:
    """Right singular vectors of the ``dim`` smallest singular values."""
    _, _, vh = linalg.svd(jac)
    return vh[vh.shape[0] - dim:].T

