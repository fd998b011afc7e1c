"""
Scenario manager for the verification toolkit.

Finds scenario documents by path or by built-in name, decodes them and
keeps the decoded documents cached for repeated runs.
"""

import json
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from clairaut_maps.models import ParseError, ScenarioError

from .scenario import Scenario
from .settings import VerificationSettings

import logging
logger = logging.getLogger(__name__)

BUILTIN_DIR = Path(__file__).resolve().parent.parent / 'scenarios'


class ScenarioManager:
    """
    Loads scenario JSON documents from explicit paths or the built-in directory.
    """

    def __init__(self, scenario_dir: Optional[Union[str, Path]] = None):
        """
        Initialize scenario manager.

        Args:
            scenario_dir: Directory of built-in scenarios. If None, uses the packaged one.
        """
        self.logger = logging.getLogger(f"{__name__}.ScenarioManager")
        self.scenario_dir = Path(scenario_dir) if scenario_dir else BUILTIN_DIR
        self._documents: Dict[Path, Dict[str, Any]] = {}
        self.logger.info(f"Scenario manager initialized with directory: {self.scenario_dir}")

    def resolve(self, name_or_path: Union[str, Path]) -> Path:
        """
        Path of a scenario given as a file path or a built-in name.

        Raises:
            ScenarioError: if neither exists
        """
        candidate = Path(name_or_path)
        if candidate.is_file():
            return candidate.resolve()
        builtin = self.scenario_dir / f"{candidate.stem if candidate.suffix == '.json' else name_or_path}.json"
        if builtin.is_file():
            return builtin.resolve()
        raise ScenarioError(f"No scenario file or built-in scenario named {str(name_or_path)!r}")

    def load_document(self, name_or_path: Union[str, Path]) -> Dict[str, Any]:
        """
        Decoded JSON document of a scenario.

        Raises:
            ParseError: on invalid JSON, with line and column
        """
        path = self.resolve(name_or_path)
        if path in self._documents:
            return self._documents[path]
        text = path.read_text(encoding='utf-8')
        try:
            document = json.loads(text)
        except json.JSONDecodeError as e:
            raise ParseError(f"Invalid JSON: {e.msg}", line=e.lineno, column=e.colno,
                             path=str(path)) from e
        if not isinstance(document, dict):
            raise ScenarioError(f"Scenario {path} must be a JSON object")
        self._documents[path] = document
        self.logger.info(f"Loaded scenario document {path}")
        return document

    def load(self, name_or_path: Union[str, Path],
             settings: Optional[VerificationSettings] = None,
             literal_metric: bool = False,
             overrides: Optional[Dict[str, Any]] = None) -> Scenario:
        """Build a ``Scenario`` from a path or built-in name."""
        path = self.resolve(name_or_path)
        return Scenario(self.load_document(path), settings, literal_metric, str(path), overrides)

    def list_scenarios(self) -> List[Dict[str, Any]]:
        """
        List built-in scenarios.

        Returns:
            List of {'name', 'description', 'path'} dictionaries sorted by name
        """
        entries = []
        if not self.scenario_dir.is_dir():
            self.logger.warning(f"Scenario directory missing: {self.scenario_dir}")
            return entries
        for path in sorted(self.scenario_dir.glob('*.json')):
            try:
                document = self.load_document(path)
            except ScenarioError as e:
                self.logger.error(f"Skipping unreadable scenario {path.name}: {e}")
                continue
            entries.append({
                'name': path.stem,
                'description': document.get('description', ''),
                'path': str(path)
            })
        return entries

    def clear_cache(self):
        self._documents.clear()


_scenario_manager: Optional[ScenarioManager] = None


def get_scenario_manager() -> ScenarioManager:
    """Get the process-wide scenario manager."""
    global _scenario_manager
    if _scenario_manager is None:
        _scenario_manager = ScenarioManager()
    return _scenario_manager
