"""
Theorem checks for Riemannian maps.

Provides residual aggregation (``tolerance``) and the Clairaut, Ricci
soliton and Kähler anti-invariance verifications (``clairaut``,
``soliton``, ``kaehler``), imported as submodules.
"""

from .tolerance import DEFAULT_TOLERANCE, ResidualTolerance, relative_drift

__all__ = [
    "ResidualTolerance",
    "DEFAULT_TOLERANCE",
    "relative_drift"
]
