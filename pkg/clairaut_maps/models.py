"""
Core data models for the Riemannian map verification toolkit.

This module defines the data structures shared by every stage of the
verification pipeline: tangent vectors, subspace splits, geodesic traces,
residual summaries, per-check results and the scenario-level report, plus
the exception hierarchy.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd


class Verdict(Enum):
    """Outcome of a single verification check."""
    PASS = "pass"
    FAIL = "fail"
    HYPOTHESIS_NOT_MET = "hypothesis-not-met"
    ERROR = "error"


class SolitonClass(Enum):
    """Ricci soliton type, fixed by the sign of lambda."""
    SHRINKING = "shrinking"
    STEADY = "steady"
    EXPANDING = "expanding"


class MetricReading(Enum):
    """Which reading of a scenario metric is in force."""
    ADOPTED = "adopted"
    LITERAL = "literal"


def _floats(values: Any) -> List[float]:
    return [float(v) for v in np.asarray(values, dtype=float).ravel()]


def _matrix(values: np.ndarray) -> List[List[float]]:
    return [[float(v) for v in row] for row in np.asarray(values, dtype=float)]


@dataclass
class TangentVector:
    """A tangent vector given by its chart components at a base point."""
    base_point: np.ndarray
    components: np.ndarray

    def __post_init__(self):
        self.base_point = np.asarray(self.base_point, dtype=float)
        self.components = np.asarray(self.components, dtype=float)

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for JSON serialization."""
        return {
            'base_point': _floats(self.base_point),
            'components': _floats(self.components)
        }


@dataclass
class FrameSplit:
    """
    Orthonormal bases for the four canonical subspaces of a map at a point.

    Bases are stored column-wise: ``kernel`` and ``horizontal`` are m×k
    matrices orthonormal under g1 at p, ``range`` and ``normal`` are n×k
    matrices orthonormal under g2 at F(p).
    """
    base_point: np.ndarray
    target_point: np.ndarray
    kernel: np.ndarray
    horizontal: np.ndarray
    range: np.ndarray
    normal: np.ndarray
    singular_values: np.ndarray

    @property
    def rank(self) -> int:
        return self.horizontal.shape[1]

    @property
    def kernel_dim(self) -> int:
        return self.kernel.shape[1]

    @property
    def normal_dim(self) -> int:
        return self.normal.shape[1]

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary."""
        return {
            'base_point': _floats(self.base_point),
            'target_point': _floats(self.target_point),
            'rank': self.rank,
            'kernel_dim': self.kernel_dim,
            'kernel': _matrix(self.kernel.T),
            'horizontal': _matrix(self.horizontal.T),
            'range': _matrix(self.range.T),
            'normal': _matrix(self.normal.T),
            'singular_values': _floats(self.singular_values)
        }


@dataclass
class GeodesicTrace:
    """
    Time-stamped samples of a curve on a charted manifold.

    Target traces decomposed against a map additionally carry the range and
    normal parts of the velocity, the angle omega between the velocity and
    its normal part, and the Clairaut invariant samples.
    """
    manifold: str
    times: np.ndarray
    points: np.ndarray
    velocities: np.ndarray
    range_components: Optional[np.ndarray] = None
    normal_components: Optional[np.ndarray] = None
    omega: Optional[np.ndarray] = None
    invariant: Optional[np.ndarray] = None

    @property
    def is_decomposed(self) -> bool:
        return self.omega is not None

    def to_frame(self) -> pd.DataFrame:
        """Tabulate the trace with columns t, point…, velocity…, omega, invariant."""
        dim = self.points.shape[1]
        frame = pd.DataFrame({'t': self.times})
        for i in range(dim):
            frame[f'point_{i + 1}'] = self.points[:, i]
        for i in range(dim):
            frame[f'velocity_{i + 1}'] = self.velocities[:, i]
        if self.omega is not None:
            frame['omega'] = self.omega
        if self.invariant is not None:
            frame['invariant'] = self.invariant
        return frame


@dataclass
class ResidualSummary:
    """Statistics of one named residual over a sample set."""
    name: str
    max: float
    mean: float
    count: int
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max < self.tolerance

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary."""
        return {
            'name': self.name,
            'max': float(self.max),
            'mean': float(self.mean),
            'count': self.count,
            'tolerance': float(self.tolerance),
            'passed': self.passed
        }


@dataclass
class CheckResult:
    """Result of one scenario check block."""
    name: str
    kind: str
    anchor: str
    verdict: Verdict
    expected: Verdict = Verdict.PASS
    residuals: List[ResidualSummary] = field(default_factory=list)
    values: Dict[str, Any] = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)
    error: Optional[str] = None

    @property
    def gated(self) -> bool:
        return self.verdict == Verdict.HYPOTHESIS_NOT_MET

    @property
    def satisfied(self) -> bool:
        """Gated checks never count against a run."""
        return self.gated or self.verdict == self.expected

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary."""
        return {
            'name': self.name,
            'kind': self.kind,
            'anchor': self.anchor,
            'verdict': self.verdict.value,
            'expected': self.expected.value,
            'satisfied': self.satisfied,
            'residuals': [r.to_dict() for r in self.residuals],
            'values': self.values,
            'notes': self.notes,
            'error': self.error
        }


@dataclass
class VerdictReport:
    """Aggregated results of a scenario run, in check declaration order."""
    scenario: str
    seed: int
    reading: MetricReading = MetricReading.ADOPTED
    deviation_notes: List[str] = field(default_factory=list)
    checks: List[CheckResult] = field(default_factory=list)

    @property
    def nonconformant(self) -> bool:
        return self.reading == MetricReading.LITERAL

    @property
    def all_satisfied(self) -> bool:
        return all(check.satisfied for check in self.checks)

    @property
    def exit_code(self) -> int:
        return 0 if self.all_satisfied else 1

    def get_check(self, name: str) -> Optional[CheckResult]:
        for check in self.checks:
            if check.name == name:
                return check
        return None

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for JSON serialization."""
        return {
            'scenario': self.scenario,
            'seed': self.seed,
            'reading': self.reading.value,
            'nonconformant': self.nonconformant,
            'deviation_notes': self.deviation_notes,
            'all_satisfied': self.all_satisfied,
            'summary': {
                verdict.value: sum(1 for c in self.checks if c.verdict == verdict)
                for verdict in Verdict
            },
            'checks': [check.to_dict() for check in self.checks]
        }


@dataclass
class ClairautCertificate:
    """Residual summaries for the two equivalent Clairaut conditions of a map."""
    map_name: str
    g: str
    condition_i: ResidualSummary
    condition_ii_umbilical: ResidualSummary
    condition_ii_h2: ResidualSummary
    eq_3_13: ResidualSummary
    eq_3_20: ResidualSummary
    sample_count: int

    @property
    def condition_i_passed(self) -> bool:
        return self.condition_i.passed

    @property
    def condition_ii_passed(self) -> bool:
        return self.condition_ii_umbilical.passed and self.condition_ii_h2.passed

    @property
    def passed(self) -> bool:
        return (self.condition_i_passed and self.condition_ii_passed
                and self.eq_3_13.passed and self.eq_3_20.passed)

    def residuals(self) -> List[ResidualSummary]:
        return [self.condition_i, self.condition_ii_umbilical, self.condition_ii_h2,
                self.eq_3_13, self.eq_3_20]

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary."""
        return {
            'map': self.map_name,
            'g': self.g,
            'condition_i': self.condition_i_passed,
            'condition_ii': self.condition_ii_passed,
            'passed': self.passed,
            'sample_count': self.sample_count,
            'residuals': [r.to_dict() for r in self.residuals()]
        }


@dataclass
class SolitonData:
    """Potential field and constant of a (possibly almost) Ricci soliton."""
    manifold: str
    potential: str
    lam: float
    variable: bool = False

    @property
    def classification(self) -> SolitonClass:
        if self.lam < 0:
            return SolitonClass.SHRINKING
        if self.lam > 0:
            return SolitonClass.EXPANDING
        return SolitonClass.STEADY

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary."""
        return {
            'manifold': self.manifold,
            'potential': self.potential,
            'lambda': float(self.lam),
            'variable': self.variable,
            'classification': self.classification.value
        }


@dataclass
class LambdaFit:
    """Best constant lambda for a potential field, with per-sample estimates."""
    lam: float
    samples: List[float]
    spread: float
    variable: bool

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary."""
        return {
            'lambda': float(self.lam),
            'lambda_samples': [float(v) for v in self.samples],
            'spread': float(self.spread),
            'almost': self.variable
        }


@dataclass
class BCDecomposition:
    """
    Splitting JV = BV + CV of the normal frame at one point.

    Columns of ``b_parts``/``c_parts`` correspond to the columns of
    ``normal``; ``mu`` holds an orthonormal basis of the part of the normal
    space orthogonal to J(rangeF*).
    """
    base_point: np.ndarray
    normal: np.ndarray
    b_parts: np.ndarray
    c_parts: np.ndarray
    mu: np.ndarray

    @property
    def lagrangian(self) -> bool:
        return self.mu.shape[1] == 0

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary."""
        return {
            'base_point': _floats(self.base_point),
            'lagrangian': self.lagrangian,
            'mu_dim': self.mu.shape[1],
            'B': _matrix(self.b_parts.T),
            'C': _matrix(self.c_parts.T)
        }


# Custom exceptions
class ClairautMapsError(Exception):
    """Base exception for the verification toolkit."""
    pass


class DomainError(ClairautMapsError):
    """Raised when an expression is evaluated outside its domain."""
    pass


class SingularMetric(ClairautMapsError):
    """Raised when a metric is not positive definite or cannot be inverted."""
    pass


class RankDeficiencyAmbiguous(ClairautMapsError):
    """Raised when a singular value falls inside the rank ambiguity band."""
    pass


class NotHorizontal(ClairautMapsError):
    """Raised when a vector expected in (kerF*)⊥ has a kernel component."""
    pass


class VNotNormal(ClairautMapsError):
    """Raised when a field expected in (rangeF*)⊥ has a range component."""
    pass


class SplitUnavailable(ClairautMapsError):
    """Raised when the rank of the differential changes near a point."""
    pass


class DomainExit(ClairautMapsError):
    """Raised when a geodesic leaves the declared chart domain."""
    pass


class BlowUp(ClairautMapsError):
    """Raised when geodesic components exceed the blow-up limit."""
    pass


class RequiresNormalFieldExtension(ClairautMapsError):
    """Raised when a normal vector is needed as a field but was not supplied."""
    pass


class LeafUnavailable(ClairautMapsError):
    """Raised when leaf curvature is needed but no leaf parametrization exists."""
    pass


class RequiresKaehler(ClairautMapsError):
    """Raised when a Kähler-only identity is requested on a non-Kähler target."""
    pass


class HypothesisNotMet(ClairautMapsError):
    """Raised when a theorem's hypothesis fails at the sampled points."""
    pass


class ScenarioError(ClairautMapsError):
    """Raised for invalid scenario input."""
    pass


class ParseError(ScenarioError):
    """Raised when scenario text or an expression cannot be parsed."""

    def __init__(self, message: str, line: Optional[int] = None,
                 column: Optional[int] = None, path: Optional[str] = None):
        self.line = line
        self.column = column
        self.path = path
        location = []
        if path:
            location.append(path)
        if line is not None:
            location.append(f"line {line}, column {column}")
        suffix = f" ({'; '.join(location)})" if location else ""
        super().__init__(f"{message}{suffix}")


class ReferenceError(ScenarioError):
    """Raised when a scenario refers to a name it does not define."""
    pass
