"""
Unit tests for residual aggregation.

Tests residual summaries, elementwise comparison, verdict derivation and
relative drift.
"""

import pytest

from clairaut_maps.checks.tolerance import DEFAULT_TOLERANCE, ResidualTolerance, relative_drift
from clairaut_maps.models import Verdict


class TestResidualTolerance:
    """Test cases for ResidualTolerance class."""

    def setup_method(self):
        """Setup test environment."""
        self.tolerance = ResidualTolerance()

    def test_default_tolerance(self):
        """Test the instance default."""
        summary = self.tolerance.summarize('r', [0.0])

        assert summary.tolerance == DEFAULT_TOLERANCE

    def test_summarize_takes_absolute_values(self):
        """Test max and mean over residual magnitudes."""
        summary = self.tolerance.summarize('r', [-3.0, 1.0], tolerance=10.0)

        assert summary.max == 3.0
        assert summary.mean == 2.0
        assert summary.count == 2
        assert summary.passed

    def test_summarize_empty(self):
        """An empty residual set passes vacuously."""
        summary = self.tolerance.summarize('r', [])

        assert summary.count == 0
        assert summary.max == 0.0
        assert summary.passed

    def test_compare(self):
        """Test elementwise difference of two sequences."""
        summary = self.tolerance.compare('eq', [1.0, 2.0], [1.0, 2.5], tolerance=1.0)

        assert summary.max == pytest.approx(0.5)
        assert summary.passed

    def test_verdict(self):
        """Every summary must pass for a passing verdict."""
        good = self.tolerance.summarize('a', [1e-12])
        bad = self.tolerance.summarize('b', [1.0])

        assert self.tolerance.verdict([good]) == Verdict.PASS
        assert self.tolerance.verdict([good, bad]) == Verdict.FAIL

    def test_build_result(self):
        """Test result assembly with an explicit verdict override."""
        summaries = [self.tolerance.summarize('a', [1.0])]
        derived = self.tolerance.build_result('riemannian', 'Eq (2.1)', summaries)
        forced = self.tolerance.build_result('riemannian', 'Eq (2.1)', summaries,
                                             verdict=Verdict.PASS, notes=['forced'])

        assert derived.verdict == Verdict.FAIL
        assert derived.name == 'riemannian'
        assert forced.verdict == Verdict.PASS
        assert forced.notes == ['forced']

    def test_gated(self):
        """Gated results keep the reason and diagnostics."""
        result = self.tolerance.gated('harmonicity', 'Theorem 3.4', 'fibres not minimal',
                                      values={'H': 1.0})

        assert result.verdict == Verdict.HYPOTHESIS_NOT_MET
        assert result.notes == ['fibres not minimal']
        assert result.values == {'H': 1.0}

    def test_get_residual_summary(self):
        """Test statistics over several summaries."""
        summaries = [self.tolerance.summarize('small', [1e-10], 1e-8),
                     self.tolerance.summarize('large', [1e-6], 1e-8)]
        stats = self.tolerance.get_residual_summary(summaries)

        assert stats['total'] == 2
        assert stats['passed'] == 1
        assert stats['failed'] == 1
        assert stats['worst'] == 'large'
        assert stats['worst_ratio'] == pytest.approx(100.0)

    def test_get_residual_summary_empty(self):
        """Test statistics with nothing to summarize."""
        assert self.tolerance.get_residual_summary([])['worst'] is None


class TestRelativeDrift:
    """Test cases for relative_drift."""

    def test_constant_samples(self):
        """A constant sequence has no drift."""
        assert relative_drift([2.0, 2.0, 2.0]) == 0.0

    def test_drift_relative_to_mean(self):
        """Spread is measured against the mean magnitude."""
        assert relative_drift([0.9, 1.1]) == pytest.approx(0.2)

    def test_empty(self):
        """Test empty input."""
        assert relative_drift([]) == 0.0
