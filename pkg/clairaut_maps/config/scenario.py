"""
Scenario documents turned into geometric objects.

A scenario names manifolds, maps, vector fields, functions, complex
structures, leaves, sample sets and geodesic declarations, and lists the
checks to run on them. ``Scenario`` parses every expression up front so
that malformed input aborts before any check runs; geodesics are
integrated on first use because integration itself can fail numerically.
"""

import re
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from clairaut_maps.checks.kaehler import ComplexStructure
from clairaut_maps.geodesic import (
    explicit_curve, horizontal_random_velocity, integrate_geodesic
)
from clairaut_maps.geometry import ChartedManifold, DomainConstraint, Leaf, VectorField
from clairaut_maps.models import GeodesicTrace, MetricReading, ReferenceError, ScenarioError
from clairaut_maps.rmap import SmoothMap
from clairaut_maps.symexpr import Expr, parse_expression

from .settings import VerificationSettings

import logging
logger = logging.getLogger(__name__)

_COMPARISON = re.compile(r'(<=|>=|!=|<|>)')
MAX_REJECTIONS = 1000


def _require(data: Dict[str, Any], key: str, path: str) -> Any:
    if key not in data:
        raise ScenarioError(f"Missing key {key!r} in {path}")
    return data[key]


def _square(entries: Sequence[Any], dim: int, path: str) -> List[List[Any]]:
    """Accept a list of rows or a flat row-major list of dim² entries."""
    if len(entries) == dim and all(isinstance(row, list) for row in entries):
        rows = [list(row) for row in entries]
    elif len(entries) == dim * dim and not any(isinstance(e, list) for e in entries):
        rows = [list(entries[i * dim:(i + 1) * dim]) for i in range(dim)]
    else:
        raise ScenarioError(f"{path} must be {dim}×{dim} (rows or {dim * dim} flat entries)")
    if any(len(row) != dim for row in rows):
        raise ScenarioError(f"{path} must be {dim}×{dim}")
    return rows


def _parse_matrix(entries: Sequence[Any], coords: Sequence[str], path: str,
                  parameters: Sequence[str] = ()) -> List[List[Expr]]:
    rows = _square(entries, len(coords), path)
    cache: Dict[str, Expr] = {}
    parsed = []
    for i, row in enumerate(rows):
        out = []
        for j, text in enumerate(row):
            key = str(text)
            if key not in cache:
                cache[key] = parse_expression(text, coords, parameters, path=f"{path}[{i}][{j}]")
            out.append(cache[key])
        parsed.append(out)
    return parsed


def _parse_domain(texts: Sequence[str], coords: Sequence[str], path: str) -> List[DomainConstraint]:
    constraints = []
    for k, text in enumerate(texts):
        parts = _COMPARISON.split(str(text), maxsplit=1)
        if len(parts) != 3:
            raise ScenarioError(f"Domain constraint {text!r} at {path}[{k}] needs one comparison")
        lhs, op, rhs = parts
        constraints.append(DomainConstraint(parse_expression(lhs, coords, path=f"{path}[{k}]"), op,
                                            parse_expression(rhs, coords, path=f"{path}[{k}]"),
                                            str(text)))
    return constraints


class Scenario:
    """A parsed scenario with its resolved objects and effective settings."""

    def __init__(self, data: Dict[str, Any], settings: Optional[VerificationSettings] = None,
                 literal_metric: bool = False, source: str = "<memory>",
                 overrides: Optional[Dict[str, Any]] = None):
        """
        Initialize from a decoded scenario document.

        Args:
            data: The JSON document as a dictionary
            settings: Base settings (defaults and environment); the scenario's
                ``tolerances`` block is applied on top
            literal_metric: Swap in every declared ``literal_metric``
            source: Where the document came from, for messages
            overrides: Settings applied last, above the scenario's own values

        Raises:
            ScenarioError: on malformed content
            ReferenceError: on names used but not defined
        """
        if not isinstance(data, dict):
            raise ScenarioError(f"Scenario {source} must be a JSON object")
        self.logger = logging.getLogger(f"{__name__}.Scenario")
        self.data = data
        self.source = source
        self.name = str(data.get('name', source))
        self.description = str(data.get('description', ''))
        self.deviation_notes = [str(n) for n in data.get('deviation_notes', [])]
        base = settings or VerificationSettings()
        self.settings = base.updated(data.get('tolerances'))
        if 'seed' in data:
            self.settings = self.settings.updated({'seed': data['seed']})
        self.settings = self.settings.updated(overrides)
        self.reading = MetricReading.ADOPTED

        self.manifolds: Dict[str, ChartedManifold] = {}
        self.maps: Dict[str, SmoothMap] = {}
        self.fields: Dict[str, VectorField] = {}
        self.functions: Dict[str, Expr] = {}
        self.structures: Dict[str, ComplexStructure] = {}
        self.leaves: Dict[str, Leaf] = {}
        self.samples: Dict[str, np.ndarray] = {}
        self.geodesic_specs: Dict[str, Dict[str, Any]] = dict(data.get('geodesics', {}))
        self._traces: Dict[str, GeodesicTrace] = {}

        self._build_manifolds(data.get('manifolds', {}), literal_metric)
        self._build_maps(data.get('maps', {}))
        self._build_fields(data.get('fields', {}))
        self._build_functions(data.get('functions', {}))
        self._build_structures(data.get('complex_structures', {}))
        self._build_leaves(data.get('leaves', {}))
        self._build_samples(data.get('samples', {}))
        for name, spec in self.geodesic_specs.items():
            self._check_geodesic_spec(name, spec)

        self.checks: List[Dict[str, Any]] = list(data.get('checks', []))
        names = [c.get('name') for c in self.checks if isinstance(c, dict)]
        duplicates = sorted({n for n in names if names.count(n) > 1})
        if duplicates:
            raise ScenarioError(f"Duplicate check names {duplicates}")
        self.logger.info(f"Loaded scenario {self.name!r}: {len(self.manifolds)} manifolds, "
                         f"{len(self.maps)} maps, {len(self.checks)} checks")

    # Lookups

    def _lookup(self, table: Dict[str, Any], kind: str, name: Any, path: str) -> Any:
        if name not in table:
            raise ReferenceError(f"{path} refers to undefined {kind} {name!r}")
        return table[name]

    def manifold(self, name: str, path: str = 'scenario') -> ChartedManifold:
        return self._lookup(self.manifolds, 'manifold', name, path)

    def map(self, name: str, path: str = 'scenario') -> SmoothMap:
        return self._lookup(self.maps, 'map', name, path)

    def field(self, name: str, path: str = 'scenario') -> VectorField:
        return self._lookup(self.fields, 'field', name, path)

    def function(self, name: str, path: str = 'scenario') -> Expr:
        return self._lookup(self.functions, 'function', name, path)

    def structure(self, name: str, path: str = 'scenario') -> ComplexStructure:
        return self._lookup(self.structures, 'complex structure', name, path)

    def leaf(self, name: str, path: str = 'scenario') -> Leaf:
        return self._lookup(self.leaves, 'leaf', name, path)

    def sample(self, name: str, path: str = 'scenario') -> np.ndarray:
        return self._lookup(self.samples, 'sample set', name, path)

    # Builders

    def _build_manifolds(self, specs: Dict[str, Any], literal_metric: bool):
        all_coords = {name: list(_require(spec, 'coords', f"manifolds.{name}"))
                      for name, spec in specs.items()}
        swapped = []
        for name, spec in specs.items():
            path = f"manifolds.{name}"
            coords = all_coords[name]
            if len(set(coords)) != len(coords):
                raise ScenarioError(f"{path}.coords has repeated names")
            metric_key = 'metric'
            if literal_metric and 'literal_metric' in spec:
                metric_key = 'literal_metric'
                swapped.append(name)
            foreign = sorted({c for other, cs in all_coords.items() if other != name
                              for c in cs} - set(coords))
            entries = _require(spec, metric_key, path)
            metric = _parse_matrix(entries, coords, f"{path}.{metric_key}", foreign)
            used = sorted({n for row in metric for e in row for n in e.free_names()} - set(coords))
            metric = [[Expr(e.node, tuple(coords) + tuple(used)) for e in row] for row in metric]
            domain = _parse_domain(spec.get('domain', []), coords, f"{path}.domain")
            self.manifolds[name] = ChartedManifold(name, coords, metric, domain, used,
                                                   self.settings.pd_tol)
        if swapped:
            self.reading = MetricReading.LITERAL
            self.logger.warning(f"Literal metric reading in force for {swapped}; report is nonconformant")
        elif literal_metric:
            self.logger.warning("--literal-metric given but no manifold declares a literal metric")

    def _build_maps(self, specs: Dict[str, Any]):
        for name, spec in specs.items():
            path = f"maps.{name}"
            source = self.manifold(_require(spec, 'source', path), f"{path}.source")
            target = self.manifold(_require(spec, 'target', path), f"{path}.target")
            components = [parse_expression(text, source.coords, path=f"{path}.components[{k}]")
                          for k, text in enumerate(_require(spec, 'components', path))]
            self.maps[name] = SmoothMap(name, source, target, components, self.settings.rank_tol,
                                        self.settings.rank_ambiguity_factor)

    def _build_fields(self, specs: Dict[str, Any]):
        for name, spec in specs.items():
            path = f"fields.{name}"
            man = self.manifold(_require(spec, 'manifold', path), f"{path}.manifold")
            components = [parse_expression(text, man.coords, path=f"{path}.components[{k}]")
                          for k, text in enumerate(_require(spec, 'components', path))]
            self.fields[name] = VectorField(components, man.coords, name)

    def _build_functions(self, specs: Dict[str, Any]):
        for name, spec in specs.items():
            path = f"functions.{name}"
            man = self.manifold(_require(spec, 'manifold', path), f"{path}.manifold")
            self.functions[name] = parse_expression(_require(spec, 'expr', path), man.coords,
                                                    path=f"{path}.expr")

    def _build_structures(self, specs: Dict[str, Any]):
        for name, spec in specs.items():
            path = f"complex_structures.{name}"
            man_name = _require(spec, 'manifold', path)
            man = self.manifold(man_name, f"{path}.manifold")
            matrix = _parse_matrix(_require(spec, 'matrix', path), man.coords, f"{path}.matrix")
            self.structures[name] = ComplexStructure(name, man_name, man.coords, matrix)

    def _build_leaves(self, specs: Dict[str, Any]):
        for name, spec in specs.items():
            path = f"leaves.{name}"
            man = self.manifold(_require(spec, 'manifold', path), f"{path}.manifold")
            params = list(_require(spec, 'params', path))
            embedding = [parse_expression(text, params, man.coords, path=f"{path}.embedding[{k}]")
                         for k, text in enumerate(_require(spec, 'embedding', path))]
            base = [parse_expression(text, man.coords, path=f"{path}.base[{k}]")
                    for k, text in enumerate(_require(spec, 'base', path))]
            self.leaves[name] = Leaf(name, man, params, embedding, base)

    def _build_samples(self, specs: Dict[str, Any]):
        for name, spec in specs.items():
            path = f"samples.{name}"
            man = self.manifold(_require(spec, 'manifold', path), f"{path}.manifold")
            if 'points' in spec:
                points = np.asarray(spec['points'], dtype=float)
                if points.ndim != 2 or points.shape[1] != man.dim:
                    raise ScenarioError(f"{path}.points must be a list of {man.dim}-vectors")
                outside = [list(p) for p in points if not man.contains(p)]
                if outside:
                    raise ScenarioError(f"{path} has points outside the domain: {outside}")
            else:
                seed = int(spec.get('seed', self.settings.seed))
                points = self._box_samples(man, _require(spec, 'box', path),
                                           int(_require(spec, 'count', path)), seed, path)
            self.samples[name] = points

    def _box_samples(self, man: ChartedManifold, box: Sequence[Sequence[float]], count: int,
                     seed: int, path: str) -> np.ndarray:
        bounds = np.asarray(box, dtype=float)
        if bounds.shape != (man.dim, 2) or np.any(bounds[:, 0] > bounds[:, 1]):
            raise ScenarioError(f"{path}.box must list {man.dim} intervals [low, high]")
        if count <= 0:
            raise ScenarioError(f"{path}.count must be positive")
        rng = np.random.default_rng(seed)
        points: List[np.ndarray] = []
        attempts = 0
        while len(points) < count:
            attempts += 1
            if attempts > MAX_REJECTIONS * count:
                raise ScenarioError(f"{path}: box sampling rejected too many points outside the domain")
            candidate = bounds[:, 0] + rng.random(man.dim) * (bounds[:, 1] - bounds[:, 0])
            if man.contains(candidate):
                points.append(candidate)
        return np.array(points)

    def _check_geodesic_spec(self, name: str, spec: Dict[str, Any]):
        path = f"geodesics.{name}"
        man = self.manifold(_require(spec, 'manifold', path), f"{path}.manifold")
        if 'map' in spec:
            self.map(spec['map'], f"{path}.map")
        if 'g' in spec:
            self.function(spec['g'], f"{path}.g")
        if 'curve' in spec:
            if len(spec['curve']) != man.dim:
                raise ScenarioError(f"{path}.curve needs {man.dim} components")
            for k, text in enumerate(spec['curve']):
                parse_expression(text, ['t'], path=f"{path}.curve[{k}]")
            return
        point = _require(spec, 'point', path)
        if len(point) != man.dim:
            raise ScenarioError(f"{path}.point needs {man.dim} components")
        velocity = _require(spec, 'velocity', path)
        if velocity == 'horizontal-random':
            if 'map' not in spec:
                raise ScenarioError(f"{path}: horizontal-random velocity needs a map")
        elif isinstance(velocity, str) or len(velocity) != man.dim:
            raise ScenarioError(f"{path}.velocity needs {man.dim} components or 'horizontal-random'")
        if 'source_point' in spec and 'map' not in spec:
            raise ScenarioError(f"{path}.source_point needs a map")

    def geodesic(self, name: str, path: str = 'scenario') -> GeodesicTrace:
        """
        The trace for a geodesic spec, integrated on first use.

        Raises:
            DomainExit, BlowUp: if integration fails
        """
        spec = self._lookup(self.geodesic_specs, 'geodesic', name, path)
        if name in self._traces:
            return self._traces[name]
        man = self.manifold(spec['manifold'])
        if man.parameters:
            F, anchor = self.geodesic_anchor(name)
            if F is None or anchor is None:
                raise ScenarioError(f"geodesics.{name}: the metric of {man.name!r} has parameters; "
                                    f"give map and source_point to bind them")
            man = F.target_at(anchor)
        step = float(spec.get('step', self.settings.geodesic_step))
        t_end = float(spec.get('t_end', self.settings.geodesic_t_end))
        if 'curve' in spec:
            components = [parse_expression(text, ['t']) for text in spec['curve']]
            trace = explicit_curve(man, components, t_end, step)
        else:
            velocity = spec['velocity']
            if velocity == 'horizontal-random':
                seed = int(spec.get('seed', self.settings.seed))
                try:
                    velocity = horizontal_random_velocity(self.map(spec['map']), spec['point'], seed)
                except ScenarioError as e:
                    raise ScenarioError(f"geodesics.{name}: {e}") from e
            trace = integrate_geodesic(man, spec['point'], velocity, t_end, step,
                                       self.settings.blowup_limit)
        self._traces[name] = trace
        self.logger.debug(f"Geodesic {name}: {len(trace.times)} samples on {man.name}")
        return trace

    @property
    def integrated_geodesics(self) -> List[str]:
        return [name for name in self.geodesic_specs if name in self._traces]

    def geodesic_anchor(self, name: str) -> Tuple[Optional[SmoothMap], Optional[np.ndarray]]:
        """(map, source point) declared with a target geodesic, if any."""
        spec = self.geodesic_specs.get(name, {})
        if 'map' not in spec:
            return None, None
        source_point = spec.get('source_point')
        return self.map(spec['map']), (np.asarray(source_point, dtype=float)
                                       if source_point is not None else None)

    def to_dict(self) -> Dict[str, Any]:
        """Summary of the scenario contents (no numeric data)."""
        return {
            'name': self.name,
            'description': self.description,
            'source': self.source,
            'reading': self.reading.value,
            'manifolds': sorted(self.manifolds),
            'maps': sorted(self.maps),
            'checks': [c.get('name') for c in self.checks],
            'settings': self.settings.to_dict()
        }
