"""
Unit tests for verification data models.

Tests verdict bookkeeping, report serialization, soliton classification
and the exception hierarchy.
"""

import numpy as np
import pytest

from clairaut_maps.models import (
    BCDecomposition, CheckResult, ClairautCertificate, ClairautMapsError, FrameSplit, GeodesicTrace,
    HypothesisNotMet, LambdaFit, MetricReading, ParseError, ReferenceError,
    ResidualSummary, ScenarioError, SolitonClass, SolitonData, TangentVector,
    Verdict, VerdictReport
)


class TestResidualSummary:
    """Test cases for ResidualSummary."""

    def test_passed_is_strict(self):
        """A residual equal to its tolerance does not pass."""
        assert ResidualSummary('r', max=1e-9, mean=1e-10, count=3, tolerance=1e-8).passed
        assert not ResidualSummary('r', max=1e-8, mean=1e-9, count=3, tolerance=1e-8).passed

    def test_to_dict(self):
        """Test serialization."""
        data = ResidualSummary('symmetry', max=0.5, mean=0.25, count=2, tolerance=1.0).to_dict()

        assert data == {'name': 'symmetry', 'max': 0.5, 'mean': 0.25, 'count': 2,
                        'tolerance': 1.0, 'passed': True}


class TestCheckResult:
    """Test cases for CheckResult."""

    def test_expected_pass(self):
        """A passing check with the default expectation is satisfied."""
        result = CheckResult(name='c', kind='riemannian', anchor='Eq (2.1)', verdict=Verdict.PASS)

        assert result.satisfied
        assert not result.gated

    def test_expected_failure(self):
        """A negative control is satisfied only when it fails."""
        failing = CheckResult(name='c', kind='riemannian', anchor='a', verdict=Verdict.FAIL,
                              expected=Verdict.FAIL)
        passing = CheckResult(name='c', kind='riemannian', anchor='a', verdict=Verdict.PASS,
                              expected=Verdict.FAIL)

        assert failing.satisfied
        assert not passing.satisfied

    def test_gated_is_always_satisfied(self):
        """Hypothesis-not-met never counts against a run."""
        result = CheckResult(name='c', kind='harmonicity', anchor='a',
                             verdict=Verdict.HYPOTHESIS_NOT_MET)

        assert result.gated
        assert result.satisfied

    def test_error_is_unsatisfied(self):
        """An error verdict is never what a check expects."""
        result = CheckResult(name='c', kind='clairaut', anchor='a', verdict=Verdict.ERROR,
                             error='DomainError: log of non-positive value')

        assert not result.satisfied
        assert result.to_dict()['error'].startswith('DomainError')


class TestVerdictReport:
    """Test cases for VerdictReport."""

    def setup_method(self):
        """Setup a report with one check of each outcome."""
        self.report = VerdictReport(scenario='demo', seed=0)
        self.report.checks = [
            CheckResult(name='a', kind='riemannian', anchor='x', verdict=Verdict.PASS),
            CheckResult(name='b', kind='riemannian', anchor='x', verdict=Verdict.FAIL,
                        expected=Verdict.FAIL),
            CheckResult(name='c', kind='harmonicity', anchor='x',
                        verdict=Verdict.HYPOTHESIS_NOT_MET),
        ]

    def test_exit_code_all_satisfied(self):
        """Test exit code 0 when every check meets its expectation."""
        assert self.report.all_satisfied
        assert self.report.exit_code == 0

    def test_exit_code_unsatisfied(self):
        """Test exit code 1 when any check misses its expectation."""
        self.report.checks.append(
            CheckResult(name='d', kind='clairaut', anchor='x', verdict=Verdict.FAIL))

        assert self.report.exit_code == 1

    def test_get_check(self):
        """Test lookup by name."""
        assert self.report.get_check('b').verdict == Verdict.FAIL
        assert self.report.get_check('missing') is None

    def test_to_dict_summary(self):
        """Test verdict counts and ordering in the serialized report."""
        data = self.report.to_dict()

        assert data['summary'] == {'pass': 1, 'fail': 1, 'hypothesis-not-met': 1, 'error': 0}
        assert [c['name'] for c in data['checks']] == ['a', 'b', 'c']
        assert data['reading'] == 'adopted'
        assert data['nonconformant'] is False

    def test_literal_reading_is_nonconformant(self):
        """Test the literal metric reading flag."""
        report = VerdictReport(scenario='demo', seed=0, reading=MetricReading.LITERAL)

        assert report.nonconformant
        assert report.to_dict()['nonconformant'] is True


class TestClairautCertificate:
    """Test cases for ClairautCertificate."""

    def make_certificate(self, eq_3_20_max):
        def summary(name, value=1e-12):
            return ResidualSummary(name, max=value, mean=value, count=3, tolerance=1e-8)
        return ClairautCertificate(
            map_name='F', g='y2',
            condition_i=summary('condition_i'),
            condition_ii_umbilical=summary('umbilical'),
            condition_ii_h2=summary('h2'),
            eq_3_13=summary('eq_3_13'),
            eq_3_20=summary('eq_3_20', eq_3_20_max),
            sample_count=3
        )

    def test_all_identities_pass(self):
        """Test a certificate with every residual below tolerance."""
        certificate = self.make_certificate(1e-12)

        assert certificate.passed
        assert certificate.to_dict()['passed'] is True

    def test_eq_3_20_failure(self):
        """The normal-part identity failing fails the certificate."""
        certificate = self.make_certificate(0.5)

        assert certificate.condition_i_passed
        assert certificate.condition_ii_passed
        assert not certificate.passed
        assert len(certificate.residuals()) == 5


class TestSolitonData:
    """Test cases for SolitonData classification."""

    @pytest.mark.parametrize('lam,expected', [
        (-1.0, SolitonClass.SHRINKING),
        (0.0, SolitonClass.STEADY),
        (2.0, SolitonClass.EXPANDING),
    ])
    def test_classification(self, lam, expected):
        """The sign of lambda fixes the soliton type."""
        assert SolitonData(manifold='N', potential='V', lam=lam).classification == expected

    def test_to_dict(self):
        """Test serialization."""
        data = SolitonData(manifold='N', potential='d1', lam=1.0).to_dict()

        assert data['classification'] == 'expanding'
        assert data['lambda'] == 1.0

    def test_lambda_fit_to_dict(self):
        """Test LambdaFit serialization."""
        data = LambdaFit(lam=-1.0, samples=[-1.0, -1.0], spread=0.0, variable=False).to_dict()

        assert data['lambda'] == -1.0
        assert data['almost'] is False


class TestGeometryRecords:
    """Test cases for TangentVector, FrameSplit, GeodesicTrace and BCDecomposition."""

    def test_tangent_vector_coerces_arrays(self):
        """Test that components become float arrays."""
        v = TangentVector([0, 1], [1, 2])

        assert v.components.dtype == float
        assert v.to_dict() == {'base_point': [0.0, 1.0], 'components': [1.0, 2.0]}

    def test_frame_split_dimensions(self):
        """Test rank and dimension properties."""
        split = FrameSplit(
            base_point=np.zeros(2), target_point=np.zeros(2),
            kernel=np.array([[0.0], [1.0]]), horizontal=np.array([[1.0], [0.0]]),
            range=np.array([[1.0], [0.0]]), normal=np.array([[0.0], [1.0]]),
            singular_values=np.array([1.0, 0.0])
        )

        assert split.rank == 1
        assert split.kernel_dim == 1
        assert split.normal_dim == 1
        assert split.to_dict()['kernel'] == [[0.0, 1.0]]

    def test_trace_frame_columns(self):
        """Test tabulation of a decomposed trace."""
        trace = GeodesicTrace(
            manifold='N', times=np.array([0.0, 1.0]),
            points=np.zeros((2, 2)), velocities=np.ones((2, 2)),
            omega=np.array([0.1, 0.2]), invariant=np.array([1.0, 1.0])
        )
        frame = trace.to_frame()

        assert trace.is_decomposed
        assert list(frame.columns) == ['t', 'point_1', 'point_2', 'velocity_1', 'velocity_2',
                                       'omega', 'invariant']
        assert len(frame) == 2

    def test_bc_lagrangian(self):
        """An empty mu block means the map is Lagrangian."""
        bc = BCDecomposition(base_point=np.zeros(2), normal=np.eye(2)[:, 1:],
                             b_parts=np.eye(2)[:, :1], c_parts=np.zeros((2, 1)),
                             mu=np.zeros((2, 0)))

        assert bc.lagrangian
        assert bc.to_dict()['mu_dim'] == 0


class TestExceptions:
    """Test cases for the exception hierarchy."""

    def test_hierarchy(self):
        """Test exception inheritance."""
        assert issubclass(HypothesisNotMet, ClairautMapsError)
        assert issubclass(ParseError, ScenarioError)
        assert issubclass(ReferenceError, ScenarioError)

    def test_parse_error_location(self):
        """Test that location details are kept and shown."""
        error = ParseError("Unexpected token", line=3, column=7, path='s.json')

        assert error.line == 3
        assert error.column == 7
        assert 's.json' in str(error)
        assert 'line 3, column 7' in str(error)

    def test_parse_error_without_location(self):
        """Test the plain message form."""
        assert str(ParseError("Bad input")) == "Bad input"
