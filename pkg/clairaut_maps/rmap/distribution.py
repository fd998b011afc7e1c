"""
The range distribution of a map extended over a neighbourhood in the target.

Quantities evaluated at target points that are not image points (along
target geodesics, for curvature identities) use the chart-frozen
extension: the span of F*(T_pM) at one source point p, taken as
constant-coefficient vectors in the target chart. Its orthogonal
complement under g2 gives the normal distribution at every point.
"""

from typing import Callable, Sequence, Tuple

import numpy as np

from clairaut_maps.geometry import ChartedManifold, gram_schmidt, orthogonal_complement, projector

from .smooth_map import SmoothMap

import logging
logger = logging.getLogger(__name__)

FD_STEP = 1e-5

VectorFunction = Callable[[np.ndarray], np.ndarray]


class FrozenRangeDistribution:
    """
    A constant-coefficient rank-r distribution on a charted target.

    Its second fundamental form is h(u, v) = P⊥ ∇ᴺ_u v = P⊥ Γ(u, v) for
    constant-coefficient u, v, and the shape operator is defined through
    g2(S_W u, v) = g2(W, h(u, v)).
    """

    def __init__(self, manifold: ChartedManifold, columns: np.ndarray, name: str = "",
                 fd_step: float = FD_STEP):
        self.manifold = manifold
        self.columns = np.asarray(columns, dtype=float)
        self.name = name
        self.fd_step = fd_step
        self.logger = logging.getLogger(f"{__name__}.FrozenRangeDistribution")
        if self.columns.ndim != 2 or self.columns.shape[0] != manifold.dim:
            raise ValueError(f"Distribution columns must be {manifold.dim}×r")

    @classmethod
    def from_map(cls, F: SmoothMap, source_point: Sequence[float],
                 fd_step: float = FD_STEP) -> 'FrozenRangeDistribution':
        split = F.split(source_point)
        return cls(F.target_at(source_point), split.range, f"range({F.name})", fd_step)

    @property
    def rank(self) -> int:
        return self.columns.shape[1]

    def range_basis(self, q: Sequence[float]) -> np.ndarray:
        return gram_schmidt(self.columns, self.manifold.metric(q))

    def normal_basis(self, q: Sequence[float]) -> np.ndarray:
        g = self.manifold.metric(q)
        return orthogonal_complement(gram_schmidt(self.columns, g), g)

    def range_projector(self, q: Sequence[float]) -> np.ndarray:
        return projector(self.range_basis(q), self.manifold.metric(q))

    def normal_projector(self, q: Sequence[float]) -> np.ndarray:
        return np.eye(self.manifold.dim) - self.range_projector(q)

    def decompose(self, q: Sequence[float], w: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Split ``w`` into its range and normal parts at ``q``."""
        tangential = self.range_projector(q) @ w
        return tangential, w - tangential

    def second_fundamental_form(self, q: Sequence[float], u: np.ndarray, v: np.ndarray) -> np.ndarray:
        return self.normal_projector(q) @ self.manifold.connection_on_vectors(q, u, v)

    def mean_curvature(self, q: Sequence[float]) -> np.ndarray:
        basis = self.range_basis(q)
        total = np.zeros(self.manifold.dim)
        for a in range(basis.shape[1]):
            total += self.second_fundamental_form(q, basis[:, a], basis[:, a])
        return total / max(basis.shape[1], 1)

    def shape_operator(self, q: Sequence[float], w: np.ndarray, u: np.ndarray) -> np.ndarray:
        """S_W u for a normal vector W and a range vector u at ``q``."""
        g = self.manifold.metric(q)
        basis = self.range_basis(q)
        result = np.zeros(self.manifold.dim)
        for a in range(basis.shape[1]):
            result += float(w @ g @ self.second_fundamental_form(q, u, basis[:, a])) * basis[:, a]
        return result

    def covariant_derivative(self, q: Sequence[float], field: VectorFunction,
                             direction: np.ndarray) -> np.ndarray:
        """∇ᴺ_d W for a vector-valued function W of the target point, by central differences."""
        q = np.asarray(q, dtype=float)
        direction = np.asarray(direction, dtype=float)
        h = self.fd_step
        derivative = (field(q + h * direction) - field(q - h * direction)) / (2.0 * h)
        return derivative + self.manifold.connection_on_vectors(q, direction, field(q))

    def directional_derivative(self, q: Sequence[float], func: Callable[[np.ndarray], float],
                               direction: np.ndarray) -> float:
        """d/dε f(q + ε·direction) at ε = 0, by central differences."""
        q = np.asarray(q, dtype=float)
        direction = np.asarray(direction, dtype=float)
        h = self.fd_step
        return float((func(q + h * direction) - func(q - h * direction)) / (2.0 * h))

    def range_frame_field(self, index: int) -> VectorFunction:
        return lambda q: self.range_basis(q)[:, index]

    def normal_connection(self, q: Sequence[float], field: VectorFunction,
                          direction: np.ndarray) -> np.ndarray:
        return self.normal_projector(q) @ self.covariant_derivative(q, field, direction)

    def normal_frame_field(self, index: int) -> VectorFunction:
        """The ``index``-th normal basis vector as a function of the target point."""
        return lambda q: self.normal_basis(q)[:, index]

    def totally_geodesic_defect(self, q: Sequence[float]) -> float:
        """
        max ‖P_range sym(∇ᴺ_{Na} Nb)‖ over the normal frame: zero when the
        normal distribution is totally geodesic.
        """
        basis = self.normal_basis(q)
        g = self.manifold.metric(q)
        p_range = self.range_projector(q)
        worst = 0.0
        for a in range(basis.shape[1]):
            for b in range(a, basis.shape[1]):
                sym = 0.5 * (self.covariant_derivative(q, self.normal_frame_field(b), basis[:, a])
                             + self.covariant_derivative(q, self.normal_frame_field(a), basis[:, b]))
                part = p_range @ sym
                worst = max(worst, float(np.sqrt(max(part @ g @ part, 0.0))))
        self.logger.debug(f"Totally geodesic defect of normal({self.name}) at {list(q)}: {worst:.3e}")
        return worst

