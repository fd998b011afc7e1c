"""
Scenario runner for the verification toolkit.

Dispatches each check block of a scenario to its verification routine,
isolates per-check numeric failures, assembles the ordered report and
writes the JSON report and CSV geodesic traces.
"""

import json
import math
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from clairaut_maps.checks import ResidualTolerance
from clairaut_maps.checks.clairaut import (
    ClairautVerifier, check_harmonicity, fit_potential, geodesic_conditions_check
)
from clairaut_maps.checks.kaehler import (
    anti_invariance_check, anti_invariant_geodesic_check, bc_check,
    clairaut_anti_invariant_check, kaehler_check, theorem_4_6_check,
    theorem_4_8_dichotomy
)
from clairaut_maps.checks.soliton import (
    conformal_killing_theorem_check, einstein_leaf_check, ricci_decomposition_check,
    scalar_range_formula_check, soliton_residual, trace_lemma_check
)
from clairaut_maps.config import KIND_PARAMETERS, Scenario, ScenarioValidator
from clairaut_maps.geodesic import (
    clairaut_monitor, decompose_velocity, order_factor, push_forward_trace,
    pythagoras_defect, speed_drift
)
from clairaut_maps.geodesic.integrator import ORDER_STEP
from clairaut_maps.geometry import ChartedManifold, conformal_check, killing_check
from clairaut_maps.models import (
    CheckResult, ClairautMapsError, GeodesicTrace, HypothesisNotMet, MetricReading,
    ScenarioError, Verdict, VerdictReport
)
from clairaut_maps.rmap import (
    SmoothMap, second_fundamental_check, tension_check, umbilical_check
)
from clairaut_maps.symexpr import parse_expression

import logging
logger = logging.getLogger(__name__)

# Minimum default tolerance for checks built on finite differences
KIND_TOLERANCE_FLOORS = {
    'geodesic_conditions': 1e-6,
    'anti_invariant_geodesic': 1e-6,
    'clairaut_anti_invariant': 1e-6,
    'ricci_decomposition': 1e-7,
    'scalar_formulas': 1e-7,
    'einstein_leaf': 1e-7,
    'conformal_killing': 1e-7,
    'minimal_range': 1e-7,
}

ORDER_BAND = (12.0, 20.0)
SPEED_DRIFT_TOL = 1e-6
PYTHAGORAS_TOL = 1e-9
CLAIRAUT_INVARIANT_ANCHOR = ("Clairaut relation: s̃(β(t)) sin ω(t) is constant along "
                             "geodesics, s̃ = e^g")
REPORT_FILE = 'report.json'
TRACE_DIR = 'traces'

Handler = Callable[[Dict[str, Any], str, float], CheckResult]


def sanitize_for_json(item: Any) -> Any:
    """Plain JSON types for report values; non-finite floats become None."""
    if isinstance(item, dict):
        return {str(k): sanitize_for_json(v) for k, v in item.items()}
    if isinstance(item, (list, tuple)):
        return [sanitize_for_json(x) for x in item]
    if isinstance(item, np.ndarray):
        return sanitize_for_json(item.tolist())
    if isinstance(item, np.generic):
        return sanitize_for_json(item.item())
    if isinstance(item, float) and not math.isfinite(item):
        return None
    return item


def report_json(report: VerdictReport) -> str:
    """Deterministic JSON text of a report."""
    return json.dumps(sanitize_for_json(report.to_dict()), indent=2, sort_keys=True,
                      ensure_ascii=False, allow_nan=False) + "\n"


class ScenarioRunner:
    """
    Runs the checks of a scenario in declaration order.

    Tolerance of a check, from lowest to highest precedence: the settings'
    ``residual_tol`` (raised to the kind's floor), the check's ``tol``, and
    the runner's ``tolerance`` override.
    """

    def __init__(self, scenario: Scenario, tolerance: Optional[float] = None):
        """
        Initialize scenario runner.

        Args:
            scenario: Loaded scenario
            tolerance: Residual tolerance forced on every check, if given
        """
        self.scenario = scenario
        self.settings = scenario.settings
        self.tolerance = tolerance
        self.logger = logging.getLogger(f"{__name__}.ScenarioRunner")
        self._decomposed: Dict[str, GeodesicTrace] = {}
        self._handlers: Dict[str, Handler] = {
            'riemannian': self._riemannian,
            'frame_split': self._frame_split,
            'second_fundamental_form': self._second_fundamental_form,
            'umbilical': self._umbilical,
            'tension_field': self._tension_field,
            'clairaut': self._clairaut,
            'harmonicity': self._harmonicity,
            'clairaut_monitor': self._clairaut_monitor,
            'geodesic_conditions': self._geodesic_conditions,
            'fit_potential': self._fit_potential,
            'integrator_order': self._integrator_order,
            'killing': self._killing,
            'conformal': self._conformal,
            'soliton': self._soliton,
            'trace_lemma': self._trace_lemma,
            'ricci_decomposition': self._ricci_decomposition,
            'scalar_formulas': self._scalar_formulas,
            'einstein_leaf': self._einstein_leaf,
            'conformal_killing': self._conformal_killing,
            'kaehler': self._kaehler,
            'anti_invariance': self._anti_invariance,
            'bc_decomposition': self._bc_decomposition,
            'anti_invariant_geodesic': self._anti_invariant_geodesic,
            'clairaut_anti_invariant': self._clairaut_anti_invariant,
            'dichotomy': self._dichotomy,
            'minimal_range': self._minimal_range,
        }
        missing = set(KIND_PARAMETERS) - set(self._handlers)
        if missing:
            raise RuntimeError(f"No handler for check kinds {sorted(missing)}")

    # Running

    def run(self) -> VerdictReport:
        """
        Validate the scenario and run every check.

        Raises:
            ScenarioError: if validation finds errors; no check runs then
        """
        validation = ScenarioValidator().validate(self.scenario)
        for warning in validation.warnings:
            self.logger.warning(warning)
        if not validation.is_valid:
            raise ScenarioError("Scenario validation failed: " + "; ".join(validation.errors))

        notes = list(self.scenario.deviation_notes)
        if self.scenario.reading == MetricReading.LITERAL:
            notes.append("Literal metric reading in force; results are nonconformant")
        report = VerdictReport(scenario=self.scenario.name, seed=self.settings.seed,
                               reading=self.scenario.reading, deviation_notes=notes)
        self.logger.info(f"Running {len(self.scenario.checks)} checks of {self.scenario.name!r}")
        for index, spec in enumerate(self.scenario.checks):
            report.checks.append(self.run_check(spec, f"checks[{index}]"))
        failed = [c.name for c in report.checks if not c.satisfied]
        if failed:
            self.logger.warning(f"Unsatisfied checks: {failed}")
        self.logger.info(f"Scenario {self.scenario.name!r} finished with exit code {report.exit_code}")
        return report

    def tolerance_for(self, spec: Dict[str, Any]) -> float:
        if self.tolerance is not None:
            return float(self.tolerance)
        if 'tol' in spec:
            return float(spec['tol'])
        return max(self.settings.residual_tol, KIND_TOLERANCE_FLOORS.get(spec['kind'], 0.0))

    def run_check(self, spec: Dict[str, Any], path: str = 'check') -> CheckResult:
        """
        Run one check block; numeric failures become an ``error`` verdict.

        Raises:
            ScenarioError: for invalid input discovered while running
        """
        name = spec['name']
        kind = spec['kind']
        expected = Verdict(spec.get('expect', Verdict.PASS.value))
        tol = self.tolerance_for(spec)
        self.logger.info(f"Check {name!r} ({kind}) started")
        try:
            result = self._handlers[kind](spec, f"{path}.{kind}", tol)
        except ScenarioError:
            raise
        except HypothesisNotMet as e:
            self.logger.info(f"Check {name!r}: hypothesis not met: {e}")
            result = CheckResult(name=name, kind=kind, anchor=kind,
                                 verdict=Verdict.HYPOTHESIS_NOT_MET, notes=[str(e)])
        except (ClairautMapsError, ValueError, ArithmeticError, np.linalg.LinAlgError) as e:
            self.logger.error(f"Check {name!r} raised {type(e).__name__}: {e}")
            result = CheckResult(name=name, kind=kind, anchor=kind, verdict=Verdict.ERROR,
                                 error=f"{type(e).__name__}: {e}")
        result.name = name
        result.expected = expected
        result.values['residual_summary'] = ResidualTolerance(tol).get_residual_summary(result.residuals)
        self.logger.info(f"Check {name!r}: {result.verdict.value} (expected {expected.value})")
        return result

    # Parameter helpers

    def _map(self, spec, path) -> SmoothMap:
        return self.scenario.map(spec['map'], f"{path}.map")

    def _samples(self, spec, path) -> np.ndarray:
        return self.scenario.sample(spec['samples'], f"{path}.samples")

    def _function(self, spec, key, path):
        return self.scenario.function(spec[key], f"{path}.{key}") if key in spec else None

    def _field(self, spec, key, path):
        return self.scenario.field(spec[key], f"{path}.{key}") if key in spec else None

    def _leaf(self, spec, key, path):
        return self.scenario.leaf(spec[key], f"{path}.{key}") if key in spec else None

    def _structure(self, spec, path):
        return self.scenario.structure(spec['structure'], f"{path}.structure")

    @staticmethod
    def _lambda(spec) -> Union[float, str]:
        value = spec['lambda']
        return value if value == 'fit' else float(value)

    # Map operator checks

    def _riemannian(self, spec, path, tol) -> CheckResult:
        return self._map(spec, path).check_riemannian(self._samples(spec, path), tol)

    def _frame_split(self, spec, path, tol) -> CheckResult:
        F = self._map(spec, path)
        matcher = ResidualTolerance(tol)
        source_defects, target_defects, splits = [], [], []
        for p in self._samples(spec, path):
            split = F.split(p)
            splits.append(split.to_dict())
            source_basis = np.column_stack([split.kernel, split.horizontal])
            target_basis = np.column_stack([split.range, split.normal])
            source_defects.append(np.max(np.abs(source_basis.T @ F.source.metric(p) @ source_basis
                                                - np.eye(F.m))))
            target_defects.append(np.max(np.abs(target_basis.T @ F.target_metric(p) @ target_basis
                                                - np.eye(F.n))))
        summaries = [matcher.summarize('source_orthonormality', source_defects),
                     matcher.summarize('target_orthonormality', target_defects)]
        return matcher.build_result('frame_split', 'kerF*, (kerF*)⊥, rangeF*, (rangeF*)⊥',
                                    summaries, values={'map': F.name,
                                                       'ranks': sorted({s['rank'] for s in splits}),
                                                       'splits': splits})

    def _second_fundamental_form(self, spec, path, tol) -> CheckResult:
        return second_fundamental_check(self._map(spec, path), self._samples(spec, path), tol)

    def _umbilical(self, spec, path, tol) -> CheckResult:
        return umbilical_check(self._map(spec, path), self._samples(spec, path), tol)

    def _tension_field(self, spec, path, tol) -> CheckResult:
        return tension_check(self._map(spec, path), self._samples(spec, path), tol)

    # Clairaut checks

    def _clairaut(self, spec, path, tol) -> CheckResult:
        normal_fields = [self.scenario.field(n, f"{path}.normal_fields")
                         for n in spec.get('normal_fields', [])] or None
        verifier = ClairautVerifier(self._map(spec, path), self._function(spec, 'g', path),
                                    normal_fields, tol)
        return verifier.check(self._samples(spec, path))

    def _harmonicity(self, spec, path, tol) -> CheckResult:
        return check_harmonicity(self._map(spec, path), self._function(spec, 'g', path),
                                 self._samples(spec, path), tol)

    def _decompose(self, F: SmoothMap, name: str, spec: Dict[str, Any], path: str, g=None
                   ) -> Tuple[GeodesicTrace, ChartedManifold]:
        """
        Target trace of a named geodesic split against F, cached per geodesic,
        with the target manifold it was split on.
        """
        trace = self.scenario.geodesic(name, path)
        if trace.manifold == F.source.name:
            beta = push_forward_trace(F, trace)
            decomposed = decompose_velocity(F, beta, source_path=trace.points, g=g,
                                            trig_zero=self.settings.trig_zero)
            target = F.target_at(trace.points[0])
        else:
            _, anchor = self.scenario.geodesic_anchor(name)
            if anchor is None:
                if 'samples' not in spec:
                    raise ScenarioError(f"{path}: geodesic {name!r} needs a source_point or the "
                                        f"check needs samples to anchor the range distribution")
                anchor = self._samples(spec, path)[0]
            decomposed = decompose_velocity(F, trace, anchor=anchor, g=g,
                                            trig_zero=self.settings.trig_zero)
            target = F.target_at(anchor)
        self._decomposed[name] = decomposed
        return decomposed, target

    def _clairaut_monitor(self, spec, path, tol) -> CheckResult:
        F = self._map(spec, path)
        g = self._function(spec, 'g', path)
        drift_tol = float(spec.get('tol', self.settings.drift_tol))
        matcher = ResidualTolerance(drift_tol)
        drifts, speeds, pythagoras, initial = [], [], [], {}
        per_geodesic = {}
        for name in spec['geodesics']:
            trace = self.scenario.geodesic(name, f"{path}.geodesics")
            decomposed, target = self._decompose(F, name, spec, path, g)
            _, drift = clairaut_monitor(decomposed, g)
            speed = speed_drift(F.source if trace.manifold == F.source.name else target, trace)
            drifts.append(drift)
            speeds.append(speed)
            pythagoras.append(pythagoras_defect(target, decomposed))
            initial[name] = float(decomposed.invariant[0])
            per_geodesic[name] = float(drift)
            self.logger.debug(f"Geodesic {name}: drift {drift:.3e}, speed drift {speed:.3e}")
        summaries = [matcher.summarize('clairaut_drift', drifts),
                     matcher.summarize('speed_drift', speeds, SPEED_DRIFT_TOL),
                     matcher.summarize('pythagoras', pythagoras, PYTHAGORAS_TOL)]
        return matcher.build_result('clairaut_monitor', CLAIRAUT_INVARIANT_ANCHOR, summaries,
                                    values={'map': F.name, 'g': str(g), 'drift': per_geodesic,
                                            'initial_invariant': initial})

    def _geodesic_conditions(self, spec, path, tol) -> CheckResult:
        F = self._map(spec, path)
        alpha = self.scenario.geodesic(spec['geodesic'], f"{path}.geodesic")
        return geodesic_conditions_check(F, alpha, self._field(spec, 'normal_field', path), tol)

    def _fit_potential(self, spec, path, tol) -> CheckResult:
        F = self._map(spec, path)
        basis = [parse_expression(text, F.target.coords, path=f"{path}.basis[{k}]")
                 for k, text in enumerate(spec['basis'])]
        return fit_potential(F, self._samples(spec, path), basis, tol)

    def _integrator_order(self, spec, path, tol) -> CheckResult:
        man = self.scenario.manifold(spec['manifold'], f"{path}.manifold")
        factor, err_coarse, err_fine = order_factor(man, spec['point'], spec['velocity'],
                                                    float(spec.get('t_end', 1.0)),
                                                    float(spec.get('step', ORDER_STEP)))
        low, high = ORDER_BAND
        matcher = ResidualTolerance(tol)
        excess = max(0.0, low - factor, factor - high)
        verdict = Verdict.PASS if excess == 0.0 else Verdict.FAIL
        return matcher.build_result(
            'integrator_order', 'RK4 order experiment: error ratio of h and h/2 near 2⁴',
            [matcher.summarize('order_band_excess', [excess])],
            values={'manifold': man.name, 'order_factor': factor, 'error_h': err_coarse,
                    'error_h_half': err_fine, 'band': list(ORDER_BAND)},
            verdict=verdict)

    # Soliton checks

    def _killing(self, spec, path, tol) -> CheckResult:
        man = self.scenario.manifold(spec['manifold'], f"{path}.manifold")
        return killing_check(man, self._field(spec, 'field', path), self._samples(spec, path), tol)

    def _conformal(self, spec, path, tol) -> CheckResult:
        man = self.scenario.manifold(spec['manifold'], f"{path}.manifold")
        result, _ = conformal_check(man, self._field(spec, 'field', path),
                                    self._samples(spec, path), tol)
        return result

    def _soliton(self, spec, path, tol) -> CheckResult:
        man = self.scenario.manifold(spec['manifold'], f"{path}.manifold")
        return soliton_residual(man, self._field(spec, 'potential', path), self._lambda(spec),
                                self._samples(spec, path), tol,
                                gradient_of=self._function(spec, 'gradient_of', path))

    def _trace_lemma(self, spec, path, tol) -> CheckResult:
        man = self.scenario.manifold(spec['manifold'], f"{path}.manifold")
        return trace_lemma_check(man, self._field(spec, 'potential', path), self._lambda(spec),
                                 self._samples(spec, path), tol)

    def _ricci_decomposition(self, spec, path, tol) -> CheckResult:
        return ricci_decomposition_check(self._map(spec, path), self._samples(spec, path),
                                         self._function(spec, 'g', path),
                                         self._leaf(spec, 'range_leaf', path),
                                         self._leaf(spec, 'normal_leaf', path),
                                         tol, self.settings.fd_step)

    def _scalar_formulas(self, spec, path, tol) -> CheckResult:
        return scalar_range_formula_check(self._map(spec, path), self._function(spec, 'g', path),
                                          self._lambda(spec), self._samples(spec, path),
                                          self._leaf(spec, 'range_leaf', path),
                                          self._leaf(spec, 'normal_leaf', path),
                                          tol, self.settings.fd_step)

    def _einstein_leaf(self, spec, path, tol) -> CheckResult:
        return einstein_leaf_check(self._map(spec, path), self._field(spec, 'potential', path),
                                   self._lambda(spec), self._function(spec, 'g', path),
                                   self._samples(spec, path), self._leaf(spec, 'range_leaf', path),
                                   tol, self.settings.fd_step)

    def _conformal_killing(self, spec, path, tol) -> CheckResult:
        beta = self.scenario.geodesic(spec['geodesic'], f"{path}.geodesic")
        return conformal_killing_theorem_check(self._map(spec, path), self._function(spec, 'g', path),
                                               self._lambda(spec),
                                               self._field(spec, 'potential', path), beta,
                                               self._samples(spec, path), tol,
                                               fd_step=self.settings.fd_step)

    # Kähler checks

    def _kaehler(self, spec, path, tol) -> CheckResult:
        J = self._structure(spec, path)
        samples = self._samples(spec, path)
        if 'map' in spec:
            F = self._map(spec, path)
            return kaehler_check(F.target_at(samples[0]), J, [F(p) for p in samples], tol)
        name = spec.get('manifold', J.manifold)
        return kaehler_check(self.scenario.manifold(name, f"{path}.manifold"), J, samples, tol)

    def _anti_invariance(self, spec, path, tol) -> CheckResult:
        return anti_invariance_check(self._map(spec, path), self._structure(spec, path),
                                     self._samples(spec, path), tol)

    def _bc_decomposition(self, spec, path, tol) -> CheckResult:
        return bc_check(self._map(spec, path), self._structure(spec, path),
                        self._samples(spec, path), tol)

    def _anti_invariant_geodesic(self, spec, path, tol) -> CheckResult:
        alpha = self.scenario.geodesic(spec['geodesic'], f"{path}.geodesic")
        return anti_invariant_geodesic_check(self._map(spec, path), self._structure(spec, path),
                                             alpha, self._field(spec, 'normal_field', path), tol,
                                             self.settings.fd_step)

    def _clairaut_anti_invariant(self, spec, path, tol) -> CheckResult:
        traces = [self.scenario.geodesic(n, f"{path}.geodesics") for n in spec['geodesics']]
        return clairaut_anti_invariant_check(self._map(spec, path), self._structure(spec, path),
                                             self._function(spec, 'g', path), traces,
                                             self._samples(spec, path), tol,
                                             fd_step=self.settings.fd_step)

    def _dichotomy(self, spec, path, tol) -> CheckResult:
        return theorem_4_8_dichotomy(self._map(spec, path), self._structure(spec, path),
                                     self._function(spec, 'g', path), self._samples(spec, path), tol)

    def _minimal_range(self, spec, path, tol) -> CheckResult:
        return theorem_4_6_check(self._map(spec, path), self._structure(spec, path),
                                 self._function(spec, 'g', path), self._samples(spec, path), tol,
                                 self.settings.fd_step)

    # Output

    def trace_frame(self, name: str) -> pd.DataFrame:
        """
        Tabulate a named geodesic.

        Target geodesics declared with a map and source point are decomposed
        against that map, with the invariant filled when the geodesic names ``g``.
        """
        if name in self._decomposed:
            return self._decomposed[name].to_frame()
        trace = self.scenario.geodesic(name)
        F, anchor = self.scenario.geodesic_anchor(name)
        spec = self.scenario.geodesic_specs[name]
        if F is not None and anchor is not None and trace.manifold != F.source.name:
            g = self.scenario.function(spec['g']) if 'g' in spec else None
            trace = decompose_velocity(F, trace, anchor=anchor, g=g,
                                       trig_zero=self.settings.trig_zero)
        return trace.to_frame()

    def traced_geodesics(self) -> List[str]:
        """Names of the geodesics integrated during the run, in declaration order."""
        return [name for name in self.scenario.geodesic_specs
                if name in self._decomposed or name in self.scenario.integrated_geodesics]

    def write_report(self, report: VerdictReport, out_dir: Union[str, Path]) -> List[Path]:
        """
        Write report.json and traces/<geodesic>.csv under ``out_dir``.

        Returns:
            Paths of the written files
        """
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        report_path = out / REPORT_FILE
        report_path.write_text(report_json(report), encoding='utf-8')
        written = [report_path]
        names = self.traced_geodesics()
        if names:
            trace_dir = out / TRACE_DIR
            trace_dir.mkdir(exist_ok=True)
            for name in names:
                path = trace_dir / f"{name}.csv"
                self.trace_frame(name).to_csv(path, index=False, float_format='%.17g')
                written.append(path)
        self.logger.info(f"Wrote {len(written)} files to {out}")
        return written


def run_scenario(scenario: Scenario, out_dir: Optional[Union[str, Path]] = None,
                 tolerance: Optional[float] = None) -> VerdictReport:
    """
    Convenience function to run a scenario and optionally write its outputs.

    Args:
        scenario: Loaded scenario
        out_dir: Output directory; nothing is written when None
        tolerance: Residual tolerance forced on every check

    Returns:
        VerdictReport
    """
    runner = ScenarioRunner(scenario, tolerance)
    report = runner.run()
    if out_dir is not None:
        runner.write_report(report, out_dir)
    return report
