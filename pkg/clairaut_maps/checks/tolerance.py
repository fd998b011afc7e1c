"""
Tolerance-based residual aggregation.

Turns per-sample residual values into named summaries (max, mean, count)
and summaries into pass/fail verdicts against configurable tolerances.
"""

from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np

from clairaut_maps.models import CheckResult, ResidualSummary, Verdict

import logging
logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 1e-8


class ResidualTolerance:
    """
    Aggregates residuals and derives verdicts.

    A verdict is a function of residuals and tolerances only: a check
    passes when every one of its summaries has ``max < tolerance``.
    """

    def __init__(self, default_tolerance: float = DEFAULT_TOLERANCE):
        """Initialize with the tolerance used when a summary names none."""
        self.default_tolerance = default_tolerance
        self.logger = logging.getLogger(f"{__name__}.ResidualTolerance")

    def summarize(self, name: str, values: Iterable[float],
                  tolerance: Optional[float] = None) -> ResidualSummary:
        """
        Summarize residual magnitudes.

        Args:
            name: Residual name used in reports
            values: Per-sample residual values (absolute values are taken)
            tolerance: Pass threshold; defaults to the instance tolerance

        Returns:
            ResidualSummary with max, mean and count
        """
        tol = self.default_tolerance if tolerance is None else float(tolerance)
        data = np.abs(np.asarray(list(values), dtype=float))
        if data.size == 0:
            summary = ResidualSummary(name=name, max=0.0, mean=0.0, count=0, tolerance=tol)
        else:
            summary = ResidualSummary(name=name, max=float(data.max()), mean=float(data.mean()),
                                      count=int(data.size), tolerance=tol)
        self.logger.debug(f"Residual {name}: max={summary.max:.3e} mean={summary.mean:.3e} "
                          f"n={summary.count} tol={tol:.1e} -> {summary.passed}")
        return summary

    def compare(self, name: str, lhs: Sequence[float], rhs: Sequence[float],
                tolerance: Optional[float] = None) -> ResidualSummary:
        """Summarize |lhs − rhs| elementwise."""
        lhs = np.asarray(lhs, dtype=float)
        rhs = np.asarray(rhs, dtype=float)
        return self.summarize(name, np.abs(lhs - rhs).ravel(), tolerance)

    def verdict(self, summaries: Sequence[ResidualSummary]) -> Verdict:
        return Verdict.PASS if all(s.passed for s in summaries) else Verdict.FAIL

    def build_result(self, kind: str, anchor: str, summaries: List[ResidualSummary],
                     values: Optional[Dict[str, Any]] = None,
                     notes: Optional[List[str]] = None,
                     verdict: Optional[Verdict] = None) -> CheckResult:
        """
        Assemble a CheckResult; the verdict follows the summaries unless given.
        """
        result = CheckResult(
            name=kind,
            kind=kind,
            anchor=anchor,
            verdict=verdict if verdict is not None else self.verdict(summaries),
            residuals=list(summaries),
            values=dict(values or {}),
            notes=list(notes or [])
        )
        self.logger.debug(f"{kind}: {result.verdict.value}")
        return result

    def gated(self, kind: str, anchor: str, reason: str,
              summaries: Optional[List[ResidualSummary]] = None,
              values: Optional[Dict[str, Any]] = None) -> CheckResult:
        """A result for a check whose hypothesis failed; residuals kept as diagnostics."""
        return CheckResult(
            name=kind,
            kind=kind,
            anchor=anchor,
            verdict=Verdict.HYPOTHESIS_NOT_MET,
            residuals=list(summaries or []),
            values=dict(values or {}),
            notes=[reason]
        )

    def get_residual_summary(self, summaries: Sequence[ResidualSummary]) -> Dict[str, Any]:
        """
        Statistics over a set of residual summaries.

        Returns:
            Dictionary with counts and the worst residual relative to its tolerance
        """
        if not summaries:
            return {'total': 0, 'passed': 0, 'failed': 0, 'worst': None, 'worst_ratio': 0.0}
        ratios = [s.max / s.tolerance if s.tolerance > 0 else float('inf') for s in summaries]
        worst = int(np.argmax(ratios))
        passed = sum(1 for s in summaries if s.passed)
        return {
            'total': len(summaries),
            'passed': passed,
            'failed': len(summaries) - passed,
            'worst': summaries[worst].name,
            'worst_ratio': float(ratios[worst])
        }


def relative_drift(samples: Sequence[float]) -> float:
    """(max − min) / max(|mean|, 1e-300)."""
    data = np.asarray(samples, dtype=float)
    if data.size == 0:
        return 0.0
    return float((data.max() - data.min()) / max(abs(data.mean()), 1e-300))
