"""
Riemannian Map Verification Toolkit

Numerical and symbolic verification of Clairaut Riemannian maps, Ricci
solitons on their targets and anti-invariant maps into Kähler manifolds,
driven by scenario documents.

This package provides:
- Symbolic expressions and single-chart Riemannian geometry
- Operator calculus of Riemannian maps
- Geodesic integration and velocity decomposition
- Clairaut, Ricci soliton and Kähler theorem checks
- Scenario configuration, runner and command-line interface
"""

from .models import (
    # Core data models
    TangentVector,
    FrameSplit,
    GeodesicTrace,
    ResidualSummary,
    CheckResult,
    VerdictReport,
    ClairautCertificate,
    SolitonData,
    LambdaFit,
    BCDecomposition,

    # Enums
    Verdict,
    SolitonClass,
    MetricReading,

    # Exceptions
    ClairautMapsError,
    DomainError,
    SingularMetric,
    RankDeficiencyAmbiguous,
    NotHorizontal,
    VNotNormal,
    SplitUnavailable,
    DomainExit,
    BlowUp,
    RequiresNormalFieldExtension,
    LeafUnavailable,
    RequiresKaehler,
    HypothesisNotMet,
    ScenarioError,
    ParseError,
    ReferenceError
)

__version__ = "1.0.0"

__all__ = [
    # Core data models
    "TangentVector",
    "FrameSplit",
    "GeodesicTrace",
    "ResidualSummary",
    "CheckResult",
    "VerdictReport",
    "ClairautCertificate",
    "SolitonData",
    "LambdaFit",
    "BCDecomposition",

    # Enums
    "Verdict",
    "SolitonClass",
    "MetricReading",

    # Exceptions
    "ClairautMapsError",
    "DomainError",
    "SingularMetric",
    "RankDeficiencyAmbiguous",
    "NotHorizontal",
    "VNotNormal",
    "SplitUnavailable",
    "DomainExit",
    "BlowUp",
    "RequiresNormalFieldExtension",
    "LeafUnavailable",
    "RequiresKaehler",
    "HypothesisNotMet",
    "ScenarioError",
    "ParseError",
    "ReferenceError"
]
