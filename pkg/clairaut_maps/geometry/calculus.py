"""
Differential operators on a charted manifold: gradient, Hessian,
Laplacian, Lie derivative of the metric, and Killing/conformal tests.
"""

from functools import lru_cache
from typing import List, Sequence, Tuple

import numpy as np

from clairaut_maps.checks.tolerance import ResidualTolerance
from clairaut_maps.models import CheckResult, TangentVector
from clairaut_maps.symexpr import ArrayFunction, Expr

from .manifold import ChartedManifold, VectorField

import logging
logger = logging.getLogger(__name__)


@lru_cache(maxsize=256)
def _scalar_derivatives(f: Expr, coords: Tuple[str, ...]) -> Tuple[ArrayFunction, ArrayFunction]:
    n = len(coords)
    first = [f.differentiate(i) for i in range(n)]
    second = [first[i].differentiate(j) for i in range(n) for j in range(n)]
    return ArrayFunction(first, (n,), coords), ArrayFunction(second, (n, n), coords)


def differential(man: ChartedManifold, f: Expr, point: Sequence[float]) -> np.ndarray:
    """Coordinate partials ∂_i f."""
    return _scalar_derivatives(f, man.coords)[0](point)


def gradient(man: ChartedManifold, f: Expr, point: Sequence[float]) -> TangentVector:
    """(∇f)^j = g^ij ∂_i f."""
    components = man.inverse_metric(point) @ differential(man, f, point)
    return man.tangent(point, components)


def hessian_matrix(man: ChartedManifold, f: Expr, point: Sequence[float]) -> np.ndarray:
    """H_ij = ∂_i∂_j f − Γ^k_ij ∂_k f."""
    first, second = _scalar_derivatives(f, man.coords)
    hess = second(point) - np.einsum('kij,k->ij', man.christoffel(point), first(point))
    return 0.5 * (hess + hess.T)


def hessian(man: ChartedManifold, f: Expr, x: TangentVector, y: TangentVector) -> float:
    """Hessian form H^f(X, Y) at the common base point of X and Y."""
    return float(x.components @ hessian_matrix(man, f, x.base_point) @ y.components)


def laplacian(man: ChartedManifold, f: Expr, point: Sequence[float]) -> float:
    """Trace of the Hessian against the inverse metric."""
    return float(np.einsum('ij,ij->', man.inverse_metric(point), hessian_matrix(man, f, point)))


def lie_derivative_matrix(man: ChartedManifold, field: VectorField, point: Sequence[float]) -> np.ndarray:
    """(L_Z g)_ij = g(∇_i Z, ∂_j) + g(∂_i, ∇_j Z)."""
    g = man.metric(point)
    nabla_z = man.field_covariant_jacobian(point, field)
    return nabla_z.T @ g + g @ nabla_z


def lie_derivative_partials(man: ChartedManifold, field: VectorField, point: Sequence[float]) -> np.ndarray:
    """(L_Z g)_ij = Z^k ∂_k g_ij + g_kj ∂_i Z^k + g_ik ∂_j Z^k, without Christoffel symbols."""
    g = man.metric(point)
    jac = field.jacobian(point)
    return (np.einsum('k,kij->ij', field.value(point), man.metric_derivative(point))
            + jac.T @ g + g @ jac)


def lie_derivative_metric(man: ChartedManifold, field: VectorField,
                          x: TangentVector, y: TangentVector) -> float:
    """(L_Z g)(X, Y)."""
    return float(x.components @ lie_derivative_matrix(man, field, x.base_point) @ y.components)


def frame_components(man: ChartedManifold, tensor: np.ndarray, point: Sequence[float]) -> np.ndarray:
    """A symmetric 2-tensor expressed in the Gram–Schmidt orthonormal frame."""
    frame = man.orthonormal_frame(point)
    return frame.T @ tensor @ frame


def killing_check(man: ChartedManifold, field: VectorField, points: Sequence[Sequence[float]],
                  tolerance: float = 1e-8) -> CheckResult:
    """Z is Killing when every orthonormal-frame entry of L_Z g vanishes."""
    matcher = ResidualTolerance(tolerance)
    residuals = [np.max(np.abs(frame_components(man, lie_derivative_matrix(man, field, p), p)))
                 for p in points]
    summary = matcher.summarize('lie_derivative', residuals)
    return matcher.build_result('killing', 'L_Z g = 0', [summary],
                                values={'field': field.name, 'manifold': man.name})


def conformal_check(man: ChartedManifold, field: VectorField, points: Sequence[Sequence[float]],
                    tolerance: float = 1e-8) -> Tuple[CheckResult, List[float]]:
    """
    Z is conformal when L_Z g − (trace/dim)·g vanishes.

    Returns:
        The check result and the potential f = trace/(2·dim) at each point
    """
    matcher = ResidualTolerance(tolerance)
    residuals: List[float] = []
    potentials: List[float] = []
    for p in points:
        lie = lie_derivative_matrix(man, field, p)
        trace = float(np.einsum('ij,ij->', man.inverse_metric(p), lie))
        traceless = lie - (trace / man.dim) * man.metric(p)
        residuals.append(np.max(np.abs(frame_components(man, traceless, p))))
        potentials.append(trace / (2 * man.dim))
    summary = matcher.summarize('traceless_lie_derivative', residuals)
    result = matcher.build_result('conformal', 'L_Z g = 2f g', [summary],
                                  values={'field': field.name, 'manifold': man.name,
                                          'potential': [float(f) for f in potentials]})
    return result, potentials
