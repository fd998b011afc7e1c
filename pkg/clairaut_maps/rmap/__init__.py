"""
Operator calculus of Riemannian maps: differential, subspace splits,
second fundamental form, shape operator, normal connection, mean
curvatures, tension field and umbilicity.
"""

from .smooth_map import SmoothMap
from .fundamental_forms import (
    mean_curvature_fiber, mean_curvature_range, normal_coefficients,
    normal_connection, normal_projector, normality_defect, range_projector,
    require_horizontal, require_normal, second_fundamental_check,
    second_fundamental_form, second_fundamental_tensor, shape_operator,
    shape_operator_dual, tension_check, tension_field,
    tension_field_from_mean_curvatures, umbilical_check, umbilical_defect
)
from .distribution import FrozenRangeDistribution

__all__ = [
    # Maps
    "SmoothMap",
    "FrozenRangeDistribution",

    # Projections and membership
    "range_projector",
    "normal_projector",
    "require_horizontal",
    "require_normal",

    # Fundamental forms
    "second_fundamental_tensor",
    "second_fundamental_form",
    "shape_operator",
    "shape_operator_dual",
    "normal_connection",
    "normal_coefficients",

    # Curvatures
    "mean_curvature_range",
    "mean_curvature_fiber",
    "tension_field",
    "tension_field_from_mean_curvatures",
    "normality_defect",
    "umbilical_defect",

    # Checks
    "second_fundamental_check",
    "umbilical_check",
    "tension_check"
]
