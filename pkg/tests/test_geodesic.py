"""
Unit tests for geodesic integration and velocity decomposition.

Tests the RK4 integrator on flat and hyperbolic charts, its convergence
order, domain and blow-up handling, and the Clairaut invariant along
hyperbolic geodesics split against F(x1, x2) = (x1, 0). The order factor
is also checked over seeded initial data on warped planes.
"""

import numpy as np
import pytest

from clairaut_maps.geodesic import (
    GeodesicIntegrator, angle_to_normal, clairaut_monitor, decompose_velocity,
    explicit_curve, geodesic_condition_residuals, horizontal_random_velocity,
    integrate_geodesic, order_factor, push_forward_trace, pythagoras_defect, speed_drift
)
from clairaut_maps.geometry import ChartedManifold, DomainConstraint, VectorField
from clairaut_maps.models import (
    BlowUp, DomainExit, RequiresNormalFieldExtension, ScenarioError
)
from clairaut_maps.rmap import SmoothMap
from clairaut_maps.symexpr import parse_expression


def make_manifold(name, coords, rows, domain=()):
    metric = [[parse_expression(t, coords) for t in row] for row in rows]
    return ChartedManifold(name, coords, metric, domain)


def make_map(source, target, texts):
    return SmoothMap('F', source, target, [parse_expression(t, source.coords) for t in texts])


class TestGeodesicIntegrator:
    """Test cases for GeodesicIntegrator."""

    def setup_method(self):
        """Setup test environment."""
        self.flat = make_manifold('R2', ['u1', 'u2'], [["1", "0"], ["0", "1"]])
        self.hyperbolic = make_manifold('N', ['y1', 'y2'], [["exp(2*y2)", "0"], ["0", "1"]])

    def test_straight_lines(self):
        """Flat geodesics are straight lines, sampled at both endpoints."""
        trace = integrate_geodesic(self.flat, [0.1, 0.2], [0.6, 0.8], t_end=1.0, step=0.1)

        assert len(trace.times) == 11
        assert trace.times[-1] == pytest.approx(1.0)
        assert trace.points[-1] == pytest.approx([0.7, 1.0])
        assert trace.velocities[-1] == pytest.approx([0.6, 0.8])

    def test_speed_is_conserved(self):
        """g(β̇, β̇) stays constant along a hyperbolic geodesic."""
        trace = integrate_geodesic(self.hyperbolic, [0.0, 0.0], [1.0, 0.5])

        assert speed_drift(self.hyperbolic, trace) < 1e-6

    def test_fourth_order(self):
        """Halving the step divides the error by about sixteen."""
        factor, err_h, err_h2 = order_factor(self.hyperbolic, [0.0, 0.0], [1.0, 0.5])

        assert 12.0 <= factor <= 20.0
        assert err_h2 < err_h

    def test_invalid_step(self):
        """Test rejection of a non-positive step."""
        with pytest.raises(ValueError):
            GeodesicIntegrator(self.flat, step=0.0)

    def test_wrong_initial_data(self):
        """Test initial data of the wrong dimension."""
        with pytest.raises(ScenarioError):
            integrate_geodesic(self.flat, [0.0], [1.0, 0.0])

    def test_domain_exit(self):
        """Leaving the chart domain stops integration."""
        coords = ['u1', 'u2']
        half_plane = make_manifold('H', coords, [["1", "0"], ["0", "1"]],
                                   [DomainConstraint(parse_expression("u1", coords), '>',
                                                     parse_expression("0", coords))])

        with pytest.raises(DomainExit):
            integrate_geodesic(half_plane, [0.1, 0.0], [-1.0, 0.0], step=0.01)
        with pytest.raises(DomainExit):
            integrate_geodesic(half_plane, [-0.1, 0.0], [1.0, 0.0], step=0.01)

    def test_blow_up(self):
        """Components beyond the blow-up limit stop integration."""
        with pytest.raises(BlowUp):
            integrate_geodesic(self.flat, [0.0, 0.0], [100.0, 0.0], step=0.5, blowup_limit=10.0)


class TestCurves:
    """Test cases for explicit curves and push-forward."""

    def setup_method(self):
        """Setup test environment."""
        self.M = make_manifold('M', ['x1', 'x2'], [["exp(2*x2)", "0"], ["0", "1"]])
        self.N = make_manifold('N', ['y1', 'y2'], [["exp(2*y2)", "0"], ["0", "1"]])
        self.F = make_map(self.M, self.N, ["x1", "0"])

    def test_explicit_curve_velocities(self):
        """Velocities are exact derivatives of the components."""
        components = [parse_expression(t, ['t']) for t in ("t", "t^2")]
        curve = explicit_curve(self.M, components, t_end=1.0, step=0.25)

        assert curve.points[-1] == pytest.approx([1.0, 1.0])
        assert curve.velocities[-1] == pytest.approx([1.0, 2.0])

    def test_explicit_curve_dimension(self):
        """Test a curve with too few components."""
        with pytest.raises(ScenarioError):
            explicit_curve(self.M, [parse_expression("t", ['t'])], t_end=1.0)

    def test_horizontal_random_velocity(self):
        """Random horizontal directions are g1-unit, horizontal and seeded."""
        p = [1.5, 0.0]
        v = horizontal_random_velocity(self.F, p, seed=3)

        assert self.M.norm(p, v) == pytest.approx(1.0)
        assert v[1] == pytest.approx(0.0)
        assert horizontal_random_velocity(self.F, p, seed=3) == pytest.approx(v)

    def test_horizontal_random_velocity_rank_zero(self):
        """A constant map has no horizontal direction to draw from."""
        constant = make_map(self.M, self.N, ["1", "2"])

        with pytest.raises(ScenarioError, match="rank 0"):
            horizontal_random_velocity(constant, [0.1, 0.2], seed=0)

    def test_push_forward_trace(self):
        """β = F∘α lives on the target."""
        alpha = integrate_geodesic(self.M, [1.5, 0.0], [1.0, 0.0], t_end=0.1, step=0.01)
        beta = push_forward_trace(self.F, alpha)

        assert beta.manifold == 'N'
        assert beta.points[:, 1] == pytest.approx(np.zeros(len(beta.times)))
        assert beta.velocities[0] == pytest.approx([1.0, 0.0])


class TestDecomposition:
    """Test cases for velocity decomposition and the Clairaut invariant."""

    def setup_method(self):
        """Setup test environment."""
        self.M = make_manifold('M', ['x1', 'x2'], [["exp(2*x2)", "0"], ["0", "1"]])
        self.N = make_manifold('N', ['y1', 'y2'], [["exp(2*y2)", "0"], ["0", "1"]])
        self.F = make_map(self.M, self.N, ["x1", "0"])
        self.g = parse_expression("y2", self.N.coords)
        self.trace = integrate_geodesic(self.N, [0.0, 0.0], [0.8, 0.6])

    def test_angle_to_normal(self):
        """Test the angle between a velocity and its normal part."""
        q = np.zeros(2)

        assert angle_to_normal(self.N, q, np.array([1.0, 1.0]), np.array([0.0, 1.0])) == \
            pytest.approx(np.pi / 4)
        assert angle_to_normal(self.N, q, np.array([1.0, 0.0]), np.zeros(2)) == \
            pytest.approx(np.pi / 2)

    def test_decompose_needs_anchor(self):
        """Test that a split source is required."""
        with pytest.raises(ValueError):
            decompose_velocity(self.F, self.trace)

    def test_clairaut_invariant_is_constant(self):
        """e^{y2} sin ω is conserved along hyperbolic geodesics."""
        decomposed = decompose_velocity(self.F, self.trace, anchor=[1.5, 0.0], g=self.g)
        samples, drift = clairaut_monitor(decomposed, self.g)

        assert decomposed.is_decomposed
        assert decomposed.invariant == pytest.approx(samples)
        assert drift < 1e-5
        assert pythagoras_defect(self.N, decomposed) < 1e-9

    def test_wrong_function_drifts(self):
        """Doubling g breaks the invariant."""
        decomposed = decompose_velocity(self.F, self.trace, anchor=[1.5, 0.0])
        _, drift = clairaut_monitor(decomposed, 2 * self.g)

        assert decomposed.invariant is None
        assert drift > 1e-2


class TestGeodesicConditions:
    """Test cases for the normal and tangential geodesic conditions."""

    def setup_method(self):
        """Setup a flat rank-2 map S → R⁴."""
        self.S = make_manifold('S', ['x1', 'x2', 'x3'],
                               [["1", "0", "0"], ["0", "1", "0"], ["0", "0", "exp(2*x1)"]])
        identity = [["1" if i == j else "0" for j in range(4)] for i in range(4)]
        self.R4 = make_manifold('R4', ['y1', 'y2', 'y3', 'y4'], identity)
        self.F = make_map(self.S, self.R4, ["x1", "x2", "0", "0"])
        self.alpha = integrate_geodesic(self.S, [0.1, 0.2, 0.3], [0.6, 0.8, 0.0], step=0.01)

    def test_straight_horizontal_geodesic(self):
        """All residuals vanish along a straight horizontal geodesic."""
        residuals = geodesic_condition_residuals(self.F, self.alpha, VectorField.zero(self.R4.coords))

        assert residuals['normal'].max() < 1e-6
        assert residuals['tangential'].max() < 1e-6
        assert residuals['direct'].max() < 1e-6

    def test_requires_field(self):
        """V must be supplied as a field."""
        with pytest.raises(RequiresNormalFieldExtension):
            geodesic_condition_residuals(self.F, self.alpha, None)


class TestOrderFactorProperties:
    """RK4 convergence order on seeded initial data."""

    def setup_method(self):
        """Setup warped planes e^{2c·y2}dy1² + dy2² with four values of c."""
        rng = np.random.default_rng(7)
        self.manifolds = [make_manifold(f"N{k}", ['y1', 'y2'],
                                        [[f"exp(2*({c:.6f})*y2)", "0"], ["0", "1"]])
                          for k, c in enumerate(rng.uniform(0.5, 1.0, size=4))]
        self.points = np.column_stack([rng.uniform(-1.0, 1.0, 200), rng.uniform(-0.5, 0.5, 200)])
        self.velocities = np.column_stack([rng.uniform(0.3, 1.0, 200), rng.uniform(-0.5, 0.5, 200)])

    def test_fourth_order_on_random_data(self):
        """The error ratio stays in [12, 20] for every case."""
        for k in range(len(self.points)):
            man = self.manifolds[k % len(self.manifolds)]
            factor, err_h, err_h2 = order_factor(man, self.points[k], self.velocities[k])

            assert 12.0 <= factor <= 20.0, (k, factor)
            assert err_h2 < err_h
