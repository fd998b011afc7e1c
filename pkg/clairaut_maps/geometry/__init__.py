"""
Single-chart Riemannian geometry: metric, Levi-Civita connection,
curvature, and the scalar and vector-field operators built on them.
"""

from .manifold import (
    ChartedManifold, DomainConstraint, VectorField,
    gram_schmidt, orthogonal_complement, projector
)
from .leaf import Leaf
from .calculus import (
    conformal_check, differential, frame_components, gradient, hessian,
    hessian_matrix, killing_check, laplacian, lie_derivative_matrix,
    lie_derivative_metric, lie_derivative_partials
)

__all__ = [
    # Manifolds and fields
    "ChartedManifold",
    "VectorField",
    "DomainConstraint",
    "Leaf",

    # Frames
    "gram_schmidt",
    "orthogonal_complement",
    "projector",

    # Operators
    "differential",
    "gradient",
    "hessian",
    "hessian_matrix",
    "laplacian",
    "lie_derivative_matrix",
    "lie_derivative_metric",
    "lie_derivative_partials",
    "frame_components",
    "killing_check",
    "conformal_check"
]
