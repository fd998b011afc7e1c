"""
Unit tests for the scenario runner and the command-line interface.

Runs a small scenario for the map (x1, x2) -> (x1, 0) between warped
planes end to end: dispatch, tolerance precedence, error isolation,
deterministic report JSON, output files and exit codes.
"""

import json
import shutil
import tempfile
from pathlib import Path

import pandas as pd
import pytest

from clairaut_maps.cli import EXIT_CHECK_FAILURE, EXIT_INPUT_ERROR, EXIT_OK, main
from clairaut_maps.config import Scenario, get_scenario_manager
from clairaut_maps.models import ScenarioError, Verdict
from clairaut_maps.runner import ScenarioRunner, report_json, run_scenario, sanitize_for_json

BUILTIN_NAMES = ['example_3_1', 'example_4_1', 'example_5_1', 'negative_controls', 'rank2_lagrangian']


def runner_document():
    """Clairaut checks on the isometry locus plus one target geodesic."""
    return {
        'name': 'warped_run',
        'description': 'Runner test scenario',
        'seed': 11,
        'deviation_notes': ['g = y2 is the adopted potential'],
        'manifolds': {
            'M': {'coords': ['x1', 'x2'], 'metric': [['exp(2*x2)', '0'], ['0', '1']]},
            'N': {'coords': ['y1', 'y2'], 'metric': [['exp(2*y2)', '0'], ['0', '1']]}
        },
        'maps': {'F': {'source': 'M', 'target': 'N', 'components': ['x1', '0']}},
        'fields': {'d2': {'manifold': 'N', 'components': ['0', '1']}},
        'functions': {'g': {'manifold': 'N', 'expr': 'y2'},
                      'g_wrong_sign': {'manifold': 'N', 'expr': '-y2'}},
        'samples': {'locus': {'manifold': 'M', 'points': [[0.5, 0.0], [1.5, 0.0], [2.5, 0.0]]},
                    'off_locus': {'manifold': 'M', 'points': [[1.0, 0.5]]}},
        'geodesics': {'t01': {'manifold': 'N', 'point': [0.0, 0.0], 'velocity': [1.0, 0.0],
                              't_end': 0.5, 'step': 0.01, 'map': 'F', 'source_point': [1.5, 0.0],
                              'g': 'g'}},
        'checks': [
            {'name': 'riemannian', 'kind': 'riemannian', 'map': 'F', 'samples': 'locus'},
            {'name': 'clairaut', 'kind': 'clairaut', 'map': 'F', 'g': 'g', 'samples': 'locus',
             'normal_fields': ['d2']},
            {'name': 'clairaut_wrong_sign', 'kind': 'clairaut', 'map': 'F', 'g': 'g_wrong_sign',
             'samples': 'locus', 'expect': 'fail'},
            {'name': 'clairaut_off_locus', 'kind': 'clairaut', 'map': 'F', 'g': 'g',
             'samples': 'off_locus'},
            {'name': 'monitor', 'kind': 'clairaut_monitor', 'map': 'F', 'g': 'g', 'geodesics': ['t01']}
        ]
    }


class TestScenarioRunner:
    """Test cases for ScenarioRunner."""

    def setup_method(self):
        """Setup test environment."""
        self.document = runner_document()
        self.temp_dir = tempfile.mkdtemp()

    def teardown_method(self):
        """Cleanup test environment."""
        shutil.rmtree(self.temp_dir)

    def test_run(self):
        """Every check meets its expectation; the gated one does not count."""
        report = ScenarioRunner(Scenario(self.document)).run()

        assert [c.name for c in report.checks] == ['riemannian', 'clairaut', 'clairaut_wrong_sign',
                                                   'clairaut_off_locus', 'monitor']
        assert report.get_check('clairaut').verdict == Verdict.PASS
        assert report.get_check('clairaut_wrong_sign').verdict == Verdict.FAIL
        assert report.get_check('clairaut_off_locus').verdict == Verdict.HYPOTHESIS_NOT_MET
        assert report.get_check('monitor').verdict == Verdict.PASS
        assert report.exit_code == 0
        assert report.seed == 11

    def test_monitor_values(self):
        """The invariant starts at e^0 sin(π/2) = 1 for a horizontal start."""
        report = ScenarioRunner(Scenario(self.document)).run()
        monitor = report.get_check('monitor')

        assert monitor.values['initial_invariant']['t01'] == pytest.approx(1.0)
        assert [r.name for r in monitor.residuals] == ['clairaut_drift', 'speed_drift', 'pythagoras']

    def test_residual_summary_per_check(self):
        """Each check carries counts of passing and failing residuals."""
        report = ScenarioRunner(Scenario(self.document)).run()
        passing = report.get_check('clairaut').values['residual_summary']
        failing = report.get_check('clairaut_wrong_sign').values['residual_summary']

        assert passing['total'] == 5
        assert passing['failed'] == 0
        assert passing['worst_ratio'] < 1.0
        assert failing['failed'] >= 1
        assert failing['worst_ratio'] >= 1.0

    def test_unmet_expectation(self):
        """A check that passes against expect 'fail' gives exit code 1."""
        self.document['checks'][1]['expect'] = 'fail'
        report = ScenarioRunner(Scenario(self.document)).run()

        assert not report.get_check('clairaut').satisfied
        assert report.exit_code == 1

    def test_tolerance_precedence(self):
        """Override, then per-check tol, then the settings with the kind's floor."""
        scenario = Scenario(self.document)
        plain = ScenarioRunner(scenario)
        forced = ScenarioRunner(scenario, tolerance=1e-3)

        assert forced.tolerance_for({'kind': 'clairaut', 'tol': 1e-5}) == 1e-3
        assert plain.tolerance_for({'kind': 'clairaut', 'tol': 1e-5}) == 1e-5
        assert plain.tolerance_for({'kind': 'clairaut'}) == 1e-8
        assert plain.tolerance_for({'kind': 'geodesic_conditions'}) == 1e-6
        assert plain.tolerance_for({'kind': 'ricci_decomposition'}) == 1e-7

    def test_loose_tolerance_changes_verdict(self):
        """A forced loose tolerance lets the wrong sign pass."""
        report = ScenarioRunner(Scenario(self.document), tolerance=1e3).run()

        assert report.get_check('clairaut_wrong_sign').verdict == Verdict.PASS
        assert report.exit_code == 1

    def test_numeric_failure_is_isolated(self):
        """A geodesic leaving its domain turns only its check into an error."""
        self.document['manifolds']['N']['domain'] = ['y1 < 0.2']
        report = ScenarioRunner(Scenario(self.document)).run()
        monitor = report.get_check('monitor')

        assert monitor.verdict == Verdict.ERROR
        assert monitor.error.startswith('DomainExit')
        assert report.get_check('clairaut').verdict == Verdict.PASS
        assert report.exit_code == 1

    def test_validation_errors_abort(self):
        """No check runs when validation fails."""
        del self.document['checks'][1]['g']

        with pytest.raises(ScenarioError, match="validation failed"):
            ScenarioRunner(Scenario(self.document)).run()

    def test_report_json_is_deterministic(self):
        """Two runs produce identical text."""
        first = report_json(ScenarioRunner(Scenario(self.document)).run())
        second = report_json(ScenarioRunner(Scenario(self.document)).run())
        data = json.loads(first)

        assert first == second
        assert data['summary'] == {'pass': 3, 'fail': 1, 'hypothesis-not-met': 1, 'error': 0}
        assert data['nonconformant'] is False
        assert data['deviation_notes'] == ['g = y2 is the adopted potential']

    def test_write_report(self):
        """report.json and one CSV per integrated geodesic are written."""
        runner = ScenarioRunner(Scenario(self.document))
        report = runner.run()
        written = runner.write_report(report, self.temp_dir)
        out = Path(self.temp_dir)

        assert written == [out / 'report.json', out / 'traces' / 't01.csv']
        frame = pd.read_csv(out / 'traces' / 't01.csv')
        assert list(frame.columns) == ['t', 'point_1', 'point_2', 'velocity_1', 'velocity_2',
                                       'omega', 'invariant']
        assert len(frame) == 51
        assert frame['invariant'].iloc[0] == pytest.approx(1.0)

    def test_run_scenario(self):
        """The convenience function writes outputs when given a directory."""
        report = run_scenario(Scenario(self.document), self.temp_dir)

        assert report.exit_code == 0
        assert (Path(self.temp_dir) / 'report.json').is_file()

    def test_sanitize_for_json(self):
        """Non-finite floats become null."""
        assert sanitize_for_json({'a': float('nan'), 'b': (1.0, float('inf'))}) == \
            {'a': None, 'b': [1.0, None]}


class TestCommandLine:
    """Test cases for the clairaut-maps command."""

    def setup_method(self):
        """Setup test environment."""
        self.temp_dir = tempfile.mkdtemp()
        self.scenario_path = Path(self.temp_dir) / 'warped_run.json'
        self.scenario_path.write_text(json.dumps(runner_document()), encoding='utf-8')

    def teardown_method(self):
        """Cleanup test environment."""
        shutil.rmtree(self.temp_dir)

    def write_variant(self, name, document):
        path = Path(self.temp_dir) / name
        path.write_text(json.dumps(document), encoding='utf-8')
        return str(path)

    def test_run_prints_report(self, capsys):
        """Without --out the report goes to stdout."""
        code = main(['run', str(self.scenario_path)])
        data = json.loads(capsys.readouterr().out)

        assert code == EXIT_OK
        assert data['scenario'] == 'warped_run'
        assert data['all_satisfied'] is True

    def test_run_writes_files(self):
        """--out writes the report and traces."""
        out = Path(self.temp_dir) / 'out'
        code = main(['run', str(self.scenario_path), '--out', str(out)])

        assert code == EXIT_OK
        assert (out / 'report.json').is_file()
        assert (out / 'traces' / 't01.csv').is_file()

    def test_seed_override(self, capsys):
        """--seed replaces the scenario seed in the report."""
        main(['run', str(self.scenario_path), '--seed', '99'])

        assert json.loads(capsys.readouterr().out)['seed'] == 99

    def test_check_failure_exit_code(self, capsys):
        """An unmet expectation exits with 1 and names the check."""
        document = runner_document()
        document['checks'][0]['expect'] = 'fail'
        code = main(['run', self.write_variant('unmet.json', document)])

        assert code == EXIT_CHECK_FAILURE
        assert "UNSATISFIED riemannian" in capsys.readouterr().err

    def test_invalid_input_exit_code(self):
        """Malformed JSON, unknown names and invalid checks exit with 2."""
        broken = Path(self.temp_dir) / 'broken.json'
        broken.write_text('{"name": ', encoding='utf-8')
        document = runner_document()
        document['checks'][0]['kind'] = 'holonomy'

        assert main(['run', str(broken)]) == EXIT_INPUT_ERROR
        assert main(['run', str(Path(self.temp_dir) / 'missing.json')]) == EXIT_INPUT_ERROR
        assert main(['run', self.write_variant('invalid.json', document)]) == EXIT_INPUT_ERROR

    def test_random_velocity_on_constant_map(self, capsys):
        """A horizontal-random start on a rank-0 map is an input error."""
        document = runner_document()
        document['maps']['C'] = {'source': 'M', 'target': 'N', 'components': ['1', '2']}
        document['geodesics']['h0'] = {'manifold': 'M', 'point': [0.1, 0.2],
                                       'velocity': 'horizontal-random', 'map': 'C'}
        code = main(['trace', self.write_variant('constant.json', document), 'h0'])

        assert code == EXIT_INPUT_ERROR
        assert "geodesics.h0" in capsys.readouterr().err

    def test_validate(self, capsys):
        """validate prints the validation result."""
        code = main(['validate', str(self.scenario_path)])
        result = json.loads(capsys.readouterr().out)

        assert code == EXIT_OK
        assert result['is_valid'] is True

    def test_trace(self, capsys):
        """trace writes one geodesic as CSV."""
        code = main(['trace', str(self.scenario_path), 't01'])
        lines = capsys.readouterr().out.strip().splitlines()

        assert code == EXIT_OK
        assert lines[0] == 't,point_1,point_2,velocity_1,velocity_2,omega,invariant'
        assert len(lines) == 52

    def test_list(self, capsys):
        """list names the packaged scenarios."""
        code = main(['list'])
        names = [line.split('\t')[0] for line in capsys.readouterr().out.splitlines()]

        assert code == EXIT_OK
        assert 'example_3_1' in names


class TestBuiltinRuns:
    """Test cases running the packaged scenarios end to end."""

    @pytest.mark.parametrize('name', BUILTIN_NAMES)
    def test_builtin_is_satisfied(self, name):
        """Every check of a packaged scenario meets its expectation."""
        scenario = get_scenario_manager().load(name)
        report = ScenarioRunner(scenario).run()

        assert [c.name for c in report.checks] == [c['name'] for c in scenario.checks]
        assert [c.name for c in report.checks if not c.satisfied] == []
        assert report.exit_code == 0
