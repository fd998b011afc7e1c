"""
Unit tests for the Clairaut characterizations of a Riemannian map.

F(x1, x2) = (x1, 0) between two copies of the warped plane
e^{2x2}dx1² + dx2² is Clairaut along x2 = 0 with g = y2.
"""

import pytest

from clairaut_maps.checks.clairaut import (
    ClairautVerifier, check_condition_i, check_condition_ii, check_eq_3_13,
    check_harmonicity, fit_potential, geodesic_conditions_check
)
from clairaut_maps.geodesic import integrate_geodesic
from clairaut_maps.geometry import ChartedManifold, VectorField
from clairaut_maps.models import Verdict
from clairaut_maps.rmap import SmoothMap
from clairaut_maps.symexpr import parse_expression


def make_manifold(name, coords, rows):
    return ChartedManifold(name, coords, [[parse_expression(t, coords) for t in row] for row in rows])


class TestClairautVerifier:
    """Test cases for ClairautVerifier."""

    def setup_method(self):
        """Setup test environment."""
        self.M = make_manifold('M', ['x1', 'x2'], [["exp(2*x2)", "0"], ["0", "1"]])
        self.N = make_manifold('N', ['y1', 'y2'], [["exp(2*y2)", "0"], ["0", "1"]])
        self.F = SmoothMap('F', self.M, self.N, [parse_expression(t, self.M.coords) for t in ("x1", "0")])
        self.g = parse_expression("y2", self.N.coords)
        self.d2 = VectorField.coordinate(1, self.N.coords, 'd2')
        self.locus = [[0.5, 0.0], [1.5, 0.0], [2.5, 0.0]]

    def test_certificate(self):
        """Both conditions hold for g = y2."""
        certificate = ClairautVerifier(self.F, self.g, [self.d2]).certificate(self.locus)

        assert certificate.condition_i_passed
        assert certificate.condition_ii_passed
        assert certificate.eq_3_13.passed
        assert certificate.eq_3_20.passed
        assert certificate.passed
        assert certificate.sample_count == 3

    def test_condition_i_without_fields(self):
        """The pointwise normal basis gives the same verdict as the field."""
        summary = check_condition_i(self.F, self.g, self.locus)

        assert summary.passed
        assert summary.count == 3

    def test_wrong_sign(self):
        """g = −y2 fails both conditions."""
        wrong = parse_expression("-y2", self.N.coords)
        condition_i = check_condition_i(self.F, wrong, self.locus, [self.d2])
        umbilical, h2 = check_condition_ii(self.F, wrong, self.locus)

        assert condition_i.max == pytest.approx(2.0)
        assert umbilical.passed
        assert not h2.passed
        assert not check_eq_3_13(self.F, wrong, self.locus, [self.d2]).passed

    def test_check_passes(self):
        """Test the report entry on the isometry locus."""
        result = ClairautVerifier(self.F, self.g, [self.d2]).check(self.locus)

        assert result.verdict == Verdict.PASS
        assert result.values['conditions_agree'] is True
        assert [r.name for r in result.residuals] == [
            'condition_i', 'condition_ii_umbilical', 'condition_ii_h2', 'eq_3_13', 'eq_3_20']

    def test_check_gated_off_locus(self):
        """Away from x2 = 0 the map is not Riemannian."""
        result = ClairautVerifier(self.F, self.g).check([[1.0, 0.5]])

        assert result.verdict == Verdict.HYPOTHESIS_NOT_MET
        assert 'riemannian' in result.notes[0]

    def test_hypotheses(self):
        """Test the two hypothesis summaries."""
        gates = ClairautVerifier(self.F, self.g).hypotheses(self.locus)

        assert [s.name for s in gates] == ['riemannian', 'normal_totally_geodesic']
        assert all(s.passed for s in gates)


class TestHarmonicityAndFit:
    """Test cases for the harmonicity criterion and potential fitting."""

    def setup_method(self):
        """Setup test environment."""
        self.M = make_manifold('M', ['x1', 'x2'], [["exp(2*x2)", "0"], ["0", "1"]])
        self.N = make_manifold('N', ['y1', 'y2'], [["exp(2*y2)", "0"], ["0", "1"]])
        self.F = SmoothMap('F', self.M, self.N, [parse_expression(t, self.M.coords) for t in ("x1", "0")])
        self.locus = [[0.5, 0.0], [2.0, 0.0]]

    def test_harmonicity_consistent(self):
        """τ ≠ 0 and g non-constant agree."""
        result = check_harmonicity(self.F, parse_expression("y2", self.N.coords), self.locus)

        assert result.verdict == Verdict.PASS
        assert result.values['harmonic'] is False
        assert result.values['g_constant'] is False
        assert result.values['max_tension_norm'] == pytest.approx(1.0)

    def test_harmonicity_inconsistent(self):
        """A constant g contradicts the non-zero tension field."""
        result = check_harmonicity(self.F, parse_expression("0", self.N.coords), self.locus)

        assert result.verdict == Verdict.FAIL
        assert result.values['g_constant'] is True

    def test_fit_potential(self):
        """The fitted potential on the basis {y2} is g = y2."""
        result = fit_potential(self.F, self.locus, [parse_expression("y2", self.N.coords)])

        assert result.verdict == Verdict.PASS
        assert result.values['coefficients'] == [pytest.approx(1.0)]
        assert result.notes == ["Fitted potential is non-authoritative"]


class TestGeodesicConditions:
    """Test cases for geodesic_conditions_check."""

    def setup_method(self):
        """Setup a flat rank-2 map S → R⁴."""
        s_coords = ['x1', 'x2', 'x3']
        self.S = make_manifold('S', s_coords, [["1", "0", "0"], ["0", "1", "0"],
                                               ["0", "0", "exp(2*x1)"]])
        r_coords = ['y1', 'y2', 'y3', 'y4']
        self.R4 = make_manifold('R4', r_coords,
                                [["1" if i == j else "0" for j in range(4)] for i in range(4)])
        self.F = SmoothMap('F', self.S, self.R4,
                           [parse_expression(t, s_coords) for t in ("x1", "x2", "0", "0")])

    def test_straight_geodesic(self):
        """A straight horizontal geodesic satisfies both conditions."""
        alpha = integrate_geodesic(self.S, [0.1, 0.2, 0.3], [0.6, 0.8, 0.0], step=0.01)
        result = geodesic_conditions_check(self.F, alpha, VectorField.zero(self.R4.coords))

        assert result.verdict == Verdict.PASS
        assert [r.name for r in result.residuals] == ['normal', 'tangential', 'direct_acceleration']
        assert result.notes == []
