"""
Splitting of target velocities against a map, the Clairaut invariant
monitor, and the geodesic conditions along pushed-forward source curves.
"""

from dataclasses import replace
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from clairaut_maps.checks.tolerance import relative_drift
from clairaut_maps.geometry import ChartedManifold, VectorField, projector
from clairaut_maps.models import GeodesicTrace, RequiresNormalFieldExtension
from clairaut_maps.rmap import (
    FrozenRangeDistribution, SmoothMap, normal_projector, second_fundamental_form, shape_operator
)
from clairaut_maps.symexpr import Expr

import logging
logger = logging.getLogger(__name__)

TRIG_ZERO = 1e-12


def angle_to_normal(manifold: ChartedManifold, q: np.ndarray, velocity: np.ndarray,
                    normal_part: np.ndarray, trig_zero: float = TRIG_ZERO) -> float:
    """ω ∈ [0, π] between β̇ and its normal part V; π/2 when V vanishes."""
    speed = manifold.norm(q, velocity)
    v_norm = manifold.norm(q, normal_part)
    if v_norm < trig_zero or speed < trig_zero:
        return float(np.pi / 2)
    cosine = manifold.inner(q, velocity, normal_part) / (speed * v_norm)
    return float(np.arccos(np.clip(cosine, -1.0, 1.0)))


def decompose_velocity(F: SmoothMap, trace: GeodesicTrace,
                       source_path: Optional[np.ndarray] = None,
                       anchor: Optional[Sequence[float]] = None,
                       g: Optional[Expr] = None,
                       trig_zero: float = TRIG_ZERO) -> GeodesicTrace:
    """
    Enrich a target trace with range/normal velocity parts, ω(t) and c(t).

    Args:
        F: The map whose range distribution splits the velocities
        trace: Curve on the target manifold
        source_path: Source points aligned with the trace samples (β = F∘α);
            the split is then the exact one at each α(t)
        anchor: Source point for the frozen range distribution, used when
            no aligned source path exists
        g: Function with s̃ = e^g; when given the invariant samples are filled

    Returns:
        A new trace with the decomposition fields set
    """
    if source_path is None and anchor is None:
        raise ValueError("decompose_velocity needs a source path or an anchor point")
    distribution = None
    if source_path is None:
        distribution = FrozenRangeDistribution.from_map(F, anchor)
        manifold = distribution.manifold
    else:
        manifold = F.target_at(source_path[0])

    tangential = np.empty_like(trace.velocities)
    normal = np.empty_like(trace.velocities)
    omega = np.empty(len(trace.times))
    for k, (q, v) in enumerate(zip(trace.points, trace.velocities)):
        if distribution is not None:
            tangential[k], normal[k] = distribution.decompose(q, v)
        else:
            p = source_path[k]
            manifold = F.target_at(p)
            split = F.split(p)
            tangential[k] = projector(split.range, manifold.metric(q)) @ v
            normal[k] = v - tangential[k]
        omega[k] = angle_to_normal(manifold, q, v, normal[k], trig_zero)

    enriched = replace(trace, range_components=tangential, normal_components=normal, omega=omega)
    if g is not None:
        enriched.invariant = invariant_samples(enriched, g)
    return enriched


def invariant_samples(trace: GeodesicTrace, g: Expr) -> np.ndarray:
    """c(t) = e^{g(β(t))} sin ω(t)."""
    if trace.omega is None:
        raise ValueError("Trace has no angle samples; decompose it first")
    return np.array([np.exp(g.evaluate(q)) * np.sin(w) for q, w in zip(trace.points, trace.omega)])


def clairaut_monitor(trace: GeodesicTrace, g: Expr) -> Tuple[np.ndarray, float]:
    """
    Clairaut invariant along a decomposed trace.

    Returns:
        (samples c(t), relative drift (max − min)/max(|mean|, 1e-300))
    """
    samples = invariant_samples(trace, g)
    return samples, relative_drift(samples)


def pythagoras_defect(manifold: ChartedManifold, trace: GeodesicTrace) -> float:
    """max |‖F*X‖² + ‖V‖² − ‖β̇‖²| over a decomposed trace."""
    worst = 0.0
    for q, v, t, n in zip(trace.points, trace.velocities, trace.range_components,
                          trace.normal_components):
        gap = manifold.inner(q, t, t) + manifold.inner(q, n, n) - manifold.inner(q, v, v)
        worst = max(worst, abs(gap))
    return worst


def covariant_time_derivative(manifold: ChartedManifold, times: np.ndarray, points: np.ndarray,
                              velocities: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    """D_t W = dW/dt + Γ(ẋ, W) for vectors W sampled along a curve."""
    derivative = np.gradient(vectors, times, axis=0, edge_order=2)
    correction = np.array([manifold.connection_on_vectors(x, v, w)
                           for x, v, w in zip(points, velocities, vectors)])
    return derivative + correction


def geodesic_condition_residuals(F: SmoothMap, alpha: GeodesicTrace,
                                 normal_field: Optional[VectorField]) -> Dict[str, np.ndarray]:
    """
    Normal and tangential geodesic conditions along β = F∘α.

    X is the horizontal part of α̇ and V the supplied normal field at β(t):

        normal:     (∇F*)(X,X) + ∇^{F⊥}_X V + ∇^{F⊥}_V V
        tangential: −S_V F*X + F*(∇ᴹ_X X) + ∇ᴺ_V F*X

    with F*X extended with constant coefficients for the derivative along
    V. The direct acceleration ‖∇_β̇ β̇‖ is returned as a cross-check.

    Raises:
        RequiresNormalFieldExtension: if no normal field is supplied
    """
    if normal_field is None:
        raise RequiresNormalFieldExtension(
            "Geodesic conditions need the normal component V as a vector field on the target")
    if len(alpha.times) < 3:
        raise ValueError("Geodesic conditions need at least three samples")

    source = F.source
    splits = [F.split(p) for p in alpha.points]
    horizontal = np.array([projector(s.horizontal, source.metric(p)) @ v
                           for s, p, v in zip(splits, alpha.points, alpha.velocities)])
    nabla_x = covariant_time_derivative(source, alpha.times, alpha.points, alpha.velocities, horizontal)

    normal_res = np.empty(len(alpha.times))
    tangential_res = np.empty(len(alpha.times))
    beta_points = np.array([F(p) for p in alpha.points])
    beta_velocities = np.array([F.push_forward(p, v) for p, v in zip(alpha.points, alpha.velocities)])
    for k, (p, split) in enumerate(zip(alpha.points, splits)):
        target = F.target_at(p)
        q = beta_points[k]
        x = horizontal[k]
        u = F.push_forward(p, x)
        v = normal_field.value(q)
        perp = normal_projector(F, p, split)
        first = (perp @ second_fundamental_form(F, p, x, x, split)
                 + perp @ target.covariant_derivative(q, normal_field, u)
                 + perp @ target.covariant_derivative(q, normal_field, v))
        second = (-shape_operator(F, p, normal_field, x, split)
                  + F.push_forward(p, nabla_x[k])
                  + target.connection_on_vectors(q, v, u))
        normal_res[k] = target.norm(q, first)
        tangential_res[k] = target.norm(q, second)

    target = F.target_at(alpha.points[0])
    acceleration = covariant_time_derivative(target, alpha.times, beta_points, beta_velocities,
                                             beta_velocities)
    direct = np.array([F.target_at(p).norm(q, a)
                       for p, q, a in zip(alpha.points, beta_points, acceleration)])
    logger.debug(f"Geodesic conditions for {F.name}: normal {normal_res.max():.3e}, "
                 f"tangential {tangential_res.max():.3e}, direct {direct.max():.3e}")
    return {'normal': normal_res, 'tangential': tangential_res, 'direct': direct}
