"""
Unit tests for verification settings, scenario parsing and validation.

Tests settings layering, construction of geometric objects from scenario
documents, and the reporting of malformed check blocks.
"""

import copy

import numpy as np
import pytest

from clairaut_maps.config import Scenario, ScenarioValidator, VerificationSettings, validate_scenario
from clairaut_maps.models import MetricReading, ReferenceError, ScenarioError


def warped_document():
    """A small scenario with the map (x1, x2) -> (x1, 0) between warped planes."""
    return {
        'name': 'warped',
        'description': 'Test scenario',
        'seed': 5,
        'manifolds': {
            'M': {'coords': ['x1', 'x2'], 'metric': [['exp(2*x2)', '0'], ['0', '1']]},
            'N': {'coords': ['y1', 'y2'], 'metric': [['exp(2*y2)', '0'], ['0', '1']]}
        },
        'maps': {'F': {'source': 'M', 'target': 'N', 'components': ['x1', '0']}},
        'fields': {'d2': {'manifold': 'N', 'components': ['0', '1']}},
        'functions': {'g': {'manifold': 'N', 'expr': 'y2'}},
        'samples': {'locus': {'manifold': 'M', 'points': [[0.5, 0.0], [1.5, 0.0]]}},
        'geodesics': {'t01': {'manifold': 'N', 'point': [0.0, 0.0], 'velocity': [1.0, 0.0],
                              't_end': 0.5, 'step': 0.05}},
        'checks': [
            {'name': 'clairaut', 'kind': 'clairaut', 'map': 'F', 'g': 'g', 'samples': 'locus',
             'normal_fields': ['d2']},
            {'name': 'monitor', 'kind': 'clairaut_monitor', 'map': 'F', 'g': 'g', 'geodesics': ['t01']}
        ]
    }


class TestVerificationSettings:
    """Test cases for VerificationSettings."""

    def test_defaults(self):
        """Test default values."""
        settings = VerificationSettings()

        assert settings.residual_tol == 1e-8
        assert settings.drift_tol == 1e-5
        assert settings.geodesic_step == 1e-3
        assert settings.seed == 0
        assert settings.log_level == 'WARNING'

    def test_updated(self):
        """Overrides are coerced to the field types."""
        settings = VerificationSettings().updated({'residual_tol': '1e-6', 'seed': '3',
                                                   'log_level': 'debug'})

        assert settings.residual_tol == 1e-6
        assert settings.seed == 3
        assert settings.log_level == 'DEBUG'
        assert VerificationSettings().residual_tol == 1e-8

    def test_updated_without_overrides(self):
        """Empty overrides return the same instance."""
        settings = VerificationSettings()

        assert settings.updated(None) is settings
        assert settings.updated({}) is settings

    def test_unknown_key(self):
        """Test rejection of unknown settings."""
        with pytest.raises(ScenarioError, match="Unknown setting"):
            VerificationSettings().updated({'tolerance': 1e-6})

    def test_invalid_values(self):
        """Tolerances must be positive numbers and seeds integers."""
        with pytest.raises(ScenarioError):
            VerificationSettings().updated({'residual_tol': -1.0})
        with pytest.raises(ScenarioError):
            VerificationSettings().updated({'fd_step': 'small'})
        with pytest.raises(ScenarioError):
            VerificationSettings().updated({'seed': 1.5})

    def test_from_env(self, monkeypatch):
        """CLAIRAUT_* variables override the defaults."""
        monkeypatch.setenv('CLAIRAUT_RESIDUAL_TOL', '1e-6')
        monkeypatch.setenv('CLAIRAUT_SEED', '7')
        monkeypatch.setenv('CLAIRAUT_DRIFT_TOL', '  ')

        settings = VerificationSettings.from_env(dotenv=False)

        assert settings.residual_tol == 1e-6
        assert settings.seed == 7
        assert settings.drift_tol == 1e-5

    def test_dict_conversion(self):
        """Test to_dict and from_dict."""
        data = VerificationSettings(seed=4).to_dict()

        assert data['seed'] == 4
        assert VerificationSettings.from_dict(data) == VerificationSettings(seed=4)


class TestScenario:
    """Test cases for Scenario construction."""

    def setup_method(self):
        """Setup test environment."""
        self.document = warped_document()

    def test_objects_are_built(self):
        """Every table is populated from the document."""
        scenario = Scenario(self.document)

        assert scenario.name == 'warped'
        assert sorted(scenario.manifolds) == ['M', 'N']
        assert scenario.map('F').rank([1.0, 0.0]) == 1
        assert scenario.function('g').evaluate([0.0, 2.0]) == 2.0
        assert scenario.sample('locus').shape == (2, 2)
        assert scenario.reading == MetricReading.ADOPTED

    def test_settings_layering(self):
        """Scenario tolerances and seed sit above the base, overrides above both."""
        self.document['tolerances'] = {'residual_tol': 1e-6, 'drift_tol': 1e-4}
        base = VerificationSettings(residual_tol=1e-9, pd_tol=1e-11)
        scenario = Scenario(self.document, base, overrides={'drift_tol': 1e-3})

        assert scenario.settings.residual_tol == 1e-6
        assert scenario.settings.drift_tol == 1e-3
        assert scenario.settings.pd_tol == 1e-11
        assert scenario.settings.seed == 5

    def test_flat_metric_entries(self):
        """A row-major list of n² entries is accepted."""
        self.document['manifolds']['M']['metric'] = ['exp(2*x2)', '0', '0', '1']
        scenario = Scenario(self.document)

        assert scenario.manifold('M').metric([0.0, 0.0]) == pytest.approx(np.eye(2))

    def test_metric_of_wrong_size(self):
        """Test rejection of a non-square metric."""
        self.document['manifolds']['M']['metric'] = [['1', '0'], ['0']]

        with pytest.raises(ScenarioError, match="2×2"):
            Scenario(self.document)

    def test_missing_key(self):
        """Test a manifold without coordinates."""
        del self.document['manifolds']['M']['coords']

        with pytest.raises(ScenarioError, match="Missing key 'coords'"):
            Scenario(self.document)

    def test_malformed_expression(self):
        """Expression errors abort loading."""
        self.document['functions']['g']['expr'] = 'y2 +'

        with pytest.raises(ScenarioError):
            Scenario(self.document)

    def test_undefined_reference(self):
        """Test a map whose target is not declared."""
        self.document['maps']['F']['target'] = 'P'

        with pytest.raises(ReferenceError, match="undefined manifold 'P'"):
            Scenario(self.document)

    def test_duplicate_check_names(self):
        """Check names must be unique."""
        self.document['checks'].append(copy.deepcopy(self.document['checks'][0]))

        with pytest.raises(ScenarioError, match="Duplicate check names"):
            Scenario(self.document)

    def test_points_outside_domain(self):
        """Explicit sample points must lie in the chart domain."""
        self.document['manifolds']['M']['domain'] = ['x1 > 1']

        with pytest.raises(ScenarioError, match="outside the domain"):
            Scenario(self.document)

    def test_box_samples(self):
        """Box samples are seeded, bounded and respect the domain."""
        self.document['manifolds']['M']['domain'] = ['x1 > 1']
        self.document['samples']['locus'] = {'manifold': 'M', 'box': [[0.0, 2.0], [0.0, 0.0]],
                                             'count': 6}
        first = Scenario(self.document).sample('locus')
        second = Scenario(self.document).sample('locus')

        assert first.shape == (6, 2)
        assert np.all(first[:, 0] > 1.0)
        assert np.all(first[:, 1] == 0.0)
        assert np.array_equal(first, second)

    def test_invalid_box(self):
        """Test a box with reversed bounds."""
        self.document['samples']['locus'] = {'manifold': 'M', 'box': [[1.0, 0.0], [0.0, 0.0]],
                                             'count': 3}

        with pytest.raises(ScenarioError, match="intervals"):
            Scenario(self.document)

    def test_geodesic_spec_validation(self):
        """Initial velocities must match the manifold dimension."""
        self.document['geodesics']['t01']['velocity'] = [1.0]

        with pytest.raises(ScenarioError, match="velocity"):
            Scenario(self.document)

    def test_geodesic_is_cached(self):
        """Geodesics are integrated once, on first use."""
        scenario = Scenario(self.document)

        assert scenario.integrated_geodesics == []
        trace = scenario.geodesic('t01')

        assert scenario.geodesic('t01') is trace
        assert scenario.integrated_geodesics == ['t01']
        assert len(trace.times) == 11

    def test_literal_metric_reading(self):
        """A declared literal metric is swapped in on request."""
        self.document['manifolds']['N']['literal_metric'] = [['exp(2*x2)', '0'], ['0', '1']]
        adopted = Scenario(self.document)
        literal = Scenario(self.document, literal_metric=True)

        assert adopted.reading == MetricReading.ADOPTED
        assert literal.reading == MetricReading.LITERAL
        assert literal.manifold('N').parameters == ('x2',)

    def test_not_an_object(self):
        """Test a document that is not a mapping."""
        with pytest.raises(ScenarioError, match="JSON object"):
            Scenario([1, 2, 3])

    def test_to_dict(self):
        """Test the scenario summary."""
        data = Scenario(self.document, source='warped.json').to_dict()

        assert data['source'] == 'warped.json'
        assert data['checks'] == ['clairaut', 'monitor']
        assert data['reading'] == 'adopted'
        assert data['settings']['seed'] == 5


class TestScenarioValidator:
    """Test cases for scenario validation."""

    def setup_method(self):
        """Setup test environment."""
        self.document = warped_document()
        self.validator = ScenarioValidator()

    def validate(self):
        return self.validator.validate(Scenario(self.document))

    def test_valid_scenario(self):
        """Test a consistent scenario."""
        result = validate_scenario(Scenario(self.document))

        assert result.is_valid
        assert result.errors == []

    def test_unknown_kind(self):
        """Test an unknown check kind."""
        self.document['checks'][0]['kind'] = 'holonomy'
        result = self.validate()

        assert not result.is_valid
        assert "unknown check kind 'holonomy'" in result.errors[0]

    def test_missing_parameter(self):
        """Test a check without a required parameter."""
        del self.document['checks'][0]['g']
        result = self.validate()

        assert not result.is_valid
        assert any("requires 'g'" in e for e in result.errors)

    def test_undefined_reference(self):
        """Test a check naming an undeclared sample set."""
        self.document['checks'][0]['samples'] = 'elsewhere'
        result = self.validate()

        assert any("undefined name 'elsewhere'" in e for e in result.errors)

    def test_empty_list_parameter(self):
        """List parameters must not be empty."""
        self.document['checks'][1]['geodesics'] = []
        result = self.validate()

        assert any("must not be empty" in e for e in result.errors)

    def test_invalid_tolerance_and_expect(self):
        """Test per-check tol and expect values."""
        self.document['checks'][0]['tol'] = 0
        self.document['checks'][1]['expect'] = 'maybe'
        result = self.validate()

        assert len(result.errors) == 2

    def test_numeric_lambda_required(self):
        """trace_lemma does not accept a fitted λ."""
        self.document['checks'].append({'name': 'lemma', 'kind': 'trace_lemma', 'manifold': 'N',
                                        'lambda': 'fit', 'samples': 'locus'})
        result = self.validate()

        assert any("numeric lambda" in e for e in result.errors)

    def test_function_on_wrong_manifold(self):
        """g must live on the target of the map."""
        self.document['functions']['g']['manifold'] = 'M'
        self.document['functions']['g']['expr'] = 'x2'
        self.document['checks'].pop()
        result = self.validate()

        assert any("not on the target 'N'" in e for e in result.errors)

    def test_warnings_and_suggestions(self):
        """Ignored parameters warn; unused geodesics are suggested for removal."""
        self.document['checks'][0]['step'] = 0.1
        self.document['checks'].pop()
        result = self.validate()

        assert result.is_valid
        assert any("'step' is ignored" in w for w in result.warnings)
        assert result.suggestions == ["Geodesics ['t01'] are not used by any check"]

    def test_no_checks(self):
        """An empty check list is valid but warned about."""
        self.document['checks'] = []
        result = self.validate()

        assert result.is_valid
        assert "Scenario declares no checks" in result.warnings
        assert result.to_dict()['is_valid'] is True

    def test_literal_metric_notes(self):
        """Literal metrics without deviation notes are flagged."""
        self.document['manifolds']['N']['literal_metric'] = [['exp(2*x2)', '0'], ['0', '1']]
        result = self.validate()

        assert any("no deviation notes" in w for w in result.warnings)
        assert any("--literal-metric" in s for s in result.suggestions)
