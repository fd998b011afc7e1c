"""
Scenario validation utilities.

Checks a loaded scenario's check blocks before anything runs: known kinds,
required parameters, references into the scenario's tables and dimension
consistency between maps, sample sets, functions and complex structures.
"""

import numbers
from dataclasses import dataclass
from typing import Any, Dict, List, Sequence, Tuple

from clairaut_maps.models import MetricReading, Verdict

from .scenario import Scenario

import logging
logger = logging.getLogger(__name__)


# kind -> (required parameters, optional parameters)
KIND_PARAMETERS: Dict[str, Tuple[Tuple[str, ...], Tuple[str, ...]]] = {
    'riemannian': (('map', 'samples'), ()),
    'frame_split': (('map', 'samples'), ()),
    'second_fundamental_form': (('map', 'samples'), ()),
    'umbilical': (('map', 'samples'), ()),
    'tension_field': (('map', 'samples'), ()),
    'clairaut': (('map', 'g', 'samples'), ('normal_fields',)),
    'harmonicity': (('map', 'g', 'samples'), ()),
    'clairaut_monitor': (('map', 'g', 'geodesics'), ('samples',)),
    'geodesic_conditions': (('map', 'geodesic', 'normal_field'), ()),
    'fit_potential': (('map', 'samples', 'basis'), ()),
    'integrator_order': (('manifold', 'point', 'velocity'), ('t_end', 'step')),
    'killing': (('manifold', 'field', 'samples'), ()),
    'conformal': (('manifold', 'field', 'samples'), ()),
    'soliton': (('manifold', 'lambda', 'samples'), ('potential', 'gradient_of')),
    'trace_lemma': (('manifold', 'lambda', 'samples'), ('potential',)),
    'ricci_decomposition': (('map', 'samples'), ('g', 'range_leaf', 'normal_leaf')),
    'scalar_formulas': (('map', 'g', 'lambda', 'samples'), ('range_leaf', 'normal_leaf')),
    'einstein_leaf': (('map', 'g', 'lambda', 'samples'), ('potential', 'range_leaf')),
    'conformal_killing': (('map', 'g', 'lambda', 'potential', 'geodesic', 'samples'), ()),
    'kaehler': (('structure', 'samples'), ('manifold', 'map')),
    'anti_invariance': (('map', 'structure', 'samples'), ()),
    'bc_decomposition': (('map', 'structure', 'samples'), ()),
    'anti_invariant_geodesic': (('map', 'structure', 'geodesic', 'normal_field'), ()),
    'clairaut_anti_invariant': (('map', 'structure', 'g', 'geodesics', 'samples'), ()),
    'dichotomy': (('map', 'structure', 'g', 'samples'), ()),
    'minimal_range': (('map', 'structure', 'g', 'samples'), ()),
}

COMMON_KEYS = ('name', 'kind', 'expect', 'tol', 'description')

# parameter -> scenario table it names
REFERENCE_TABLES = {
    'map': 'maps',
    'manifold': 'manifolds',
    'g': 'functions',
    'gradient_of': 'functions',
    'potential': 'fields',
    'field': 'fields',
    'normal_field': 'fields',
    'normal_fields': 'fields',
    'structure': 'structures',
    'range_leaf': 'leaves',
    'normal_leaf': 'leaves',
    'samples': 'samples',
    'geodesic': 'geodesic_specs',
    'geodesics': 'geodesic_specs',
}

LIST_PARAMETERS = ('normal_fields', 'geodesics', 'basis')

# kinds whose samples live on the map's source
SOURCE_SAMPLE_KINDS = frozenset(
    kind for kind, (required, _) in KIND_PARAMETERS.items()
    if 'map' in required and 'samples' in required
)


@dataclass
class ValidationResult:
    """Result of scenario validation."""
    is_valid: bool
    errors: List[str]
    warnings: List[str]
    suggestions: List[str]

    def add_error(self, message: str):
        """Add an error message."""
        self.errors.append(message)
        self.is_valid = False

    def add_warning(self, message: str):
        """Add a warning message."""
        self.warnings.append(message)

    def add_suggestion(self, message: str):
        """Add a suggestion message."""
        self.suggestions.append(message)

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary."""
        return {
            'is_valid': self.is_valid,
            'errors': self.errors,
            'warnings': self.warnings,
            'suggestions': self.suggestions
        }


class ScenarioValidator:
    """Validates the check blocks of a loaded scenario with detailed error reporting."""

    def __init__(self):
        self.logger = logging.getLogger(f"{__name__}.ScenarioValidator")

    def validate(self, scenario: Scenario) -> ValidationResult:
        """
        Validate a scenario's checks against its tables.

        Args:
            scenario: A scenario whose objects parsed successfully

        Returns:
            ValidationResult with validation details
        """
        result = ValidationResult(is_valid=True, errors=[], warnings=[], suggestions=[])

        if not scenario.checks:
            result.add_warning("Scenario declares no checks")

        for index, spec in enumerate(scenario.checks):
            self._validate_check(scenario, index, spec, result)

        # Metric readings
        if scenario.reading == MetricReading.LITERAL:
            result.add_warning("Literal metric reading in force: the report will be marked nonconformant")
        literal = sorted(name for name, spec in scenario.data.get('manifolds', {}).items()
                         if 'literal_metric' in spec)
        if literal and scenario.reading == MetricReading.ADOPTED:
            result.add_suggestion(f"Manifolds {literal} declare a literal metric; "
                                  f"run with --literal-metric to evaluate it")
        if literal and not scenario.deviation_notes:
            result.add_warning("Scenario declares literal metrics but no deviation notes")

        unused = sorted(set(scenario.geodesic_specs) - self._referenced(scenario, ('geodesic', 'geodesics')))
        if unused:
            result.add_suggestion(f"Geodesics {unused} are not used by any check")

        self.logger.debug(f"Scenario validation completed: {len(result.errors)} errors, "
                          f"{len(result.warnings)} warnings")
        return result

    def _validate_check(self, scenario: Scenario, index: int, spec: Any, result: ValidationResult):
        if not isinstance(spec, dict):
            result.add_error(f"checks[{index}] must be an object")
            return
        name = spec.get('name')
        path = f"checks[{index}]" if not name else f"checks[{index}] ({name})"
        if not isinstance(name, str) or not name:
            result.add_error(f"{path}: name is required")

        kind = spec.get('kind')
        if kind not in KIND_PARAMETERS:
            result.add_error(f"{path}: unknown check kind {kind!r}")
            return

        expect = spec.get('expect', Verdict.PASS.value)
        if expect not in [v.value for v in Verdict]:
            result.add_error(f"{path}: expect must be one of {[v.value for v in Verdict]}")
        elif expect in (Verdict.ERROR.value, Verdict.HYPOTHESIS_NOT_MET.value):
            result.add_warning(f"{path}: expect {expect!r} is unusual; gated checks are always satisfied")

        if 'tol' in spec and not self._positive_number(spec['tol']):
            result.add_error(f"{path}: tol must be a positive number")

        required, optional = KIND_PARAMETERS[kind]
        for key in required:
            if key not in spec:
                result.add_error(f"{path}: kind {kind!r} requires {key!r}")
        for key in spec:
            if key not in required and key not in optional and key not in COMMON_KEYS:
                result.add_warning(f"{path}: parameter {key!r} is ignored by kind {kind!r}")

        for key, table in REFERENCE_TABLES.items():
            if key not in spec:
                continue
            names = spec[key] if key in LIST_PARAMETERS else [spec[key]]
            if not isinstance(names, list):
                result.add_error(f"{path}: {key} must be a list")
                continue
            for ref in names:
                if ref not in getattr(scenario, table):
                    result.add_error(f"{path}: {key} refers to undefined name {ref!r}")

        for key in LIST_PARAMETERS:
            if key in spec and isinstance(spec[key], list) and not spec[key]:
                result.add_error(f"{path}: {key} must not be empty")

        if 'lambda' in spec and spec['lambda'] != 'fit' and not self._number(spec['lambda']):
            result.add_error(f"{path}: lambda must be a number or 'fit'")
        if kind in ('trace_lemma', 'scalar_formulas', 'einstein_leaf', 'conformal_killing') \
                and spec.get('lambda') == 'fit':
            result.add_error(f"{path}: kind {kind!r} needs a numeric lambda")

        if result.is_valid:
            self._validate_dimensions(scenario, path, kind, spec, result)

    def _validate_dimensions(self, scenario: Scenario, path: str, kind: str,
                             spec: Dict[str, Any], result: ValidationResult):
        F = scenario.maps.get(spec.get('map'))
        samples = scenario.samples.get(spec.get('samples'))

        if F is not None and samples is not None and kind in SOURCE_SAMPLE_KINDS:
            self._expect_dim(samples, F.m, f"{path}: samples", f"the source of {F.name!r}", result)
        if F is not None:
            for key in ('g',):
                if key in spec and spec[key] in scenario.functions:
                    declared = scenario.data['functions'][spec[key]].get('manifold')
                    if declared != F.target.name:
                        result.add_error(f"{path}: function {spec[key]!r} lives on {declared!r}, "
                                         f"not on the target {F.target.name!r}")
            for key in ('potential', 'normal_field'):
                if key in spec and spec[key] in scenario.fields:
                    if scenario.fields[spec[key]].dim != F.n:
                        result.add_error(f"{path}: field {spec[key]!r} must have {F.n} components")
            if 'structure' in spec and spec['structure'] in scenario.structures:
                J = scenario.structures[spec['structure']]
                if J.manifold != F.target.name:
                    result.add_error(f"{path}: structure {J.name!r} lives on {J.manifold!r}, "
                                     f"not on the target {F.target.name!r}")

        if 'manifold' in spec and spec['manifold'] in scenario.manifolds:
            man = scenario.manifolds[spec['manifold']]
            if samples is not None:
                self._expect_dim(samples, man.dim, f"{path}: samples", f"manifold {man.name!r}", result)
            for key in ('point', 'velocity'):
                if key in spec and (not isinstance(spec[key], list) or len(spec[key]) != man.dim):
                    result.add_error(f"{path}: {key} needs {man.dim} components")
            for key in ('field', 'potential'):
                if key in spec and spec[key] in scenario.fields:
                    if scenario.fields[spec[key]].dim != man.dim:
                        result.add_error(f"{path}: field {spec[key]!r} must have {man.dim} components")

        for key in ('t_end', 'step'):
            if key in spec and not self._positive_number(spec[key]):
                result.add_error(f"{path}: {key} must be a positive number")

    def _expect_dim(self, samples, dim: int, label: str, where: str, result: ValidationResult):
        if samples.shape[1] != dim:
            result.add_error(f"{label} have dimension {samples.shape[1]}, {where} has dimension {dim}")

    def _referenced(self, scenario: Scenario, keys: Sequence[str]) -> set:
        names = set()
        for spec in scenario.checks:
            if not isinstance(spec, dict):
                continue
            for key in keys:
                value = spec.get(key)
                if isinstance(value, list):
                    names.update(value)
                elif value is not None:
                    names.add(value)
        return names

    @staticmethod
    def _number(value: Any) -> bool:
        return isinstance(value, numbers.Real) and not isinstance(value, bool)

    def _positive_number(self, value: Any) -> bool:
        return self._number(value) and value > 0


def validate_scenario(scenario: Scenario) -> ValidationResult:
    """
    Convenience function to validate a scenario.

    Args:
        scenario: Loaded scenario

    Returns:
        ValidationResult
    """
    return ScenarioValidator().validate(scenario)
