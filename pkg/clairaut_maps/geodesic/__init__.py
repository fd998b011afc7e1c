"""
Geodesics on charted manifolds and their decomposition against a map.
"""

from .integrator import (
    GeodesicIntegrator, explicit_curve, horizontal_random_velocity,
    integrate_geodesic, order_factor, push_forward_trace, speed_drift
)
from .decomposition import (
    angle_to_normal, clairaut_monitor, covariant_time_derivative,
    decompose_velocity, geodesic_condition_residuals, invariant_samples,
    pythagoras_defect
)

__all__ = [
    # Integration
    "GeodesicIntegrator",
    "integrate_geodesic",
    "explicit_curve",
    "horizontal_random_velocity",
    "push_forward_trace",
    "speed_drift",
    "order_factor",

    # Decomposition
    "angle_to_normal",
    "decompose_velocity",
    "invariant_samples",
    "clairaut_monitor",
    "pythagoras_defect",
    "covariant_time_derivative",
    "geodesic_condition_residuals"
]
