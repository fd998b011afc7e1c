"""
Unit tests for the scenario manager.

Tests resolving scenarios by path and built-in name, JSON decoding errors
and listing of the scenario directory.
"""

import json
import shutil
import tempfile
from pathlib import Path

import pytest

from clairaut_maps.config import ScenarioManager, get_scenario_manager
from clairaut_maps.models import ParseError, ScenarioError

BUILTIN_NAMES = ['example_3_1', 'example_4_1', 'example_5_1', 'negative_controls', 'rank2_lagrangian']

MINIMAL = {
    'name': 'plane',
    'description': 'Euclidean plane',
    'manifolds': {'R2': {'coords': ['u1', 'u2'], 'metric': [['1', '0'], ['0', '1']]}},
    'samples': {'origin': {'manifold': 'R2', 'points': [[0.0, 0.0]]}},
    'checks': []
}


class TestScenarioManager:
    """Test cases for ScenarioManager."""

    def setup_method(self):
        """Setup test environment."""
        self.temp_dir = tempfile.mkdtemp()
        self.manager = ScenarioManager(scenario_dir=self.temp_dir)

    def teardown_method(self):
        """Cleanup test environment."""
        shutil.rmtree(self.temp_dir)

    def write(self, name, content):
        path = Path(self.temp_dir) / name
        path.write_text(content if isinstance(content, str) else json.dumps(content),
                        encoding='utf-8')
        return path

    def test_resolve_by_path_and_name(self):
        """A scenario resolves from its path, its stem or its file name."""
        path = self.write('plane.json', MINIMAL).resolve()

        assert self.manager.resolve(str(path)) == path
        assert self.manager.resolve('plane') == path
        assert self.manager.resolve('plane.json') == path

    def test_resolve_missing(self):
        """Test an unknown scenario name."""
        with pytest.raises(ScenarioError, match="No scenario file"):
            self.manager.resolve('nowhere')

    def test_load(self):
        """Test building a Scenario from a file."""
        self.write('plane.json', MINIMAL)
        scenario = self.manager.load('plane')

        assert scenario.name == 'plane'
        assert scenario.sample('origin').shape == (1, 2)
        assert scenario.source.endswith('plane.json')

    def test_invalid_json_reports_location(self):
        """Decoding errors carry line and column."""
        self.write('broken.json', '{\n  "name": "broken",\n  "checks": [,]\n}\n')

        with pytest.raises(ParseError) as excinfo:
            self.manager.load_document('broken')

        assert excinfo.value.line == 3
        assert excinfo.value.column == 14
        assert "line 3, column 14" in str(excinfo.value)

    def test_document_must_be_object(self):
        """Test a JSON array at the top level."""
        self.write('list.json', '[1, 2]')

        with pytest.raises(ScenarioError, match="JSON object"):
            self.manager.load_document('list')

    def test_documents_are_cached(self):
        """A decoded document is reused until the cache is cleared."""
        path = self.write('plane.json', MINIMAL)
        first = self.manager.load_document('plane')
        path.write_text(json.dumps(dict(MINIMAL, name='changed')), encoding='utf-8')

        assert self.manager.load_document('plane') is first
        self.manager.clear_cache()
        assert self.manager.load_document('plane')['name'] == 'changed'

    def test_list_scenarios(self):
        """Listing skips unreadable files and sorts by name."""
        self.write('b_plane.json', MINIMAL)
        self.write('a_plane.json', dict(MINIMAL, description='first'))
        self.write('c_broken.json', '{')

        entries = self.manager.list_scenarios()

        assert [e['name'] for e in entries] == ['a_plane', 'b_plane']
        assert entries[0]['description'] == 'first'

    def test_missing_directory(self):
        """A missing directory lists nothing."""
        manager = ScenarioManager(scenario_dir=Path(self.temp_dir) / 'absent')

        assert manager.list_scenarios() == []


class TestBuiltinScenarios:
    """Test cases for the packaged scenarios."""

    def test_builtins_are_listed(self):
        """Every packaged scenario is listed with a description."""
        entries = ScenarioManager().list_scenarios()

        assert [e['name'] for e in entries] == BUILTIN_NAMES
        assert all(e['description'] for e in entries)

    def test_shared_manager(self):
        """get_scenario_manager returns one instance."""
        assert get_scenario_manager() is get_scenario_manager()

    @pytest.mark.parametrize('name', BUILTIN_NAMES)
    def test_builtin_parses(self, name):
        """Each packaged scenario loads and declares checks."""
        scenario = ScenarioManager().load(name)

        assert scenario.checks
        assert scenario.deviation_notes
