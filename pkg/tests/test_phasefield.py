import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phaseshell import GridSpec, ModelParams, ScalarField, edge_function, epsilon_from_cells, init_phi, potential_dF, potential_F

from conftest import random_field


class TestModelParams:
    def test_defaults(self):
        p = ModelParams(epsilon=0.04, gamma=0.1, dt=1e-4)
        assert p.chi == pytest.approx(0.02)
        assert p.stabilization == pytest.approx(2.0 / 0.04 ** 2)
        assert p.lam == 1e-10
        assert p.gs_tol == 1e-6 and p.newton_tol == 1e-6

    @pytest.mark.parametrize("bad", [
        dict(epsilon=0.0), dict(epsilon=-1.0),
        dict(chi=0.04),               # chi must stay below epsilon
        dict(chi=0.0), dict(chi=-0.1),
        dict(gamma=0.0), dict(lam=0.0),
        dict(stabilization=-1.0), dict(dt=0.0),
        dict(sweep="zigzag"),
    ])
    def test_invariants(self, bad):
        kwargs = dict(epsilon=0.04, gamma=0.1, dt=1e-4)
        kwargs.update(bad)
        with pytest.raises(ValueError):
            ModelParams(**kwargs)

    def test_zero_stabilization_allowed(self):
        assert ModelParams(epsilon=0.04, gamma=0.1, dt=1e-4, stabilization=0.0).stabilization == 0.0


class TestPotential:
    def test_well_minima(self):
        assert potential_F(1.0) == 0.0
        assert potential_F(-1.0) == 0.0
        assert potential_dF(1.0) == 0.0
        assert potential_dF(-1.0) == 0.0

    def test_barrier_top(self):
        assert potential_F(0.0) == 0.25
        assert potential_dF(0.0) == 0.0

    def test_central_difference_oracle(self, rng):
        phis = rng.uniform(-2.0, 2.0, size=50)
        for delta in (1e-4, 5e-5):
            approx = (potential_F(phis + delta) - potential_F(phis - delta)) / (2 * delta)
            np.testing.assert_allclose(approx, potential_dF(phis), atol=20 * delta ** 2)

    @given(st.floats(-3, 3))
    @settings(max_examples=100, deadline=None)
    def test_derivative_property(self, phi):
        delta = 1e-5
        approx = (potential_F(phi + delta) - potential_F(phi - delta)) / (2 * delta)
        assert approx == pytest.approx(potential_dF(phi), abs=1e-7)

    def test_nonnegative(self, rng):
        assert np.all(potential_F(rng.uniform(-5, 5, 100)) >= 0.0)


class TestInitPhi:
    def make(self, d_values, p, spec):
        d = ScalarField.from_interior(spec, d_values)
        return init_phi(d, p)

    def test_zero_level_at_gamma(self, spec4):
        p = ModelParams(epsilon=0.05, gamma=0.1, dt=1e-4)
        phi0 = self.make(np.full(spec4.shape, p.gamma), p, spec4)
        np.testing.assert_array_equal(phi0.interior, 0.0)

    def test_closed_form_at_zero_distance(self, spec4):
        h = spec4.h
        eps = 0.05
        p = ModelParams(epsilon=eps, gamma=5 * h, dt=1e-4)  # chi defaults to eps/2
        phi0 = self.make(np.zeros(spec4.shape), p, spec4)
        expected = math.tanh(5 * h / (math.sqrt(2) * eps / 2))
        np.testing.assert_allclose(phi0.interior, expected, rtol=1e-15)

    def test_open_interval(self, spec4, rng):
        p = ModelParams(epsilon=0.05, gamma=0.1, dt=1e-4)
        phi0 = self.make(rng.uniform(0, 0.4, spec4.shape), p, spec4)
        assert np.all(phi0.interior > -1.0) and np.all(phi0.interior < 1.0)
        # far from the samples the profile saturates but never overshoots
        far = self.make(np.full(spec4.shape, 50.0), p, spec4)
        assert np.all(np.abs(far.interior) <= 1.0)

    def test_monotone_in_distance(self, spec4, rng):
        p = ModelParams(epsilon=0.05, gamma=0.1, dt=1e-4)
        d_values = rng.uniform(0, 0.5, spec4.shape)
        phi0 = self.make(d_values, p, spec4)
        d_flat = d_values.ravel()
        phi_flat = phi0.interior.ravel()
        order = np.argsort(d_flat)
        assert np.all(np.diff(phi_flat[order]) <= 1e-15)


class TestEdgeFunction:
    def test_bulk_floor(self, spec4):
        lam = 1e-10
        for bulk in (1.0, -1.0):
            g = edge_function(ScalarField.full(spec4, bulk), lam)
            np.testing.assert_allclose(g.interior, lam, rtol=1e-6)

    def test_interface_peak(self, spec4):
        lam = 1e-10
        g = edge_function(ScalarField.full(spec4, 0.0), lam)
        np.testing.assert_array_equal(g.interior, 1.0 + lam)

    def test_bounds_exhaustive(self, spec4, rng):
        lam = 1e-10
        phi0 = ScalarField.from_interior(spec4, rng.uniform(-1, 1, spec4.shape))
        g = edge_function(phi0, lam)
        assert np.all(g.interior >= lam)
        assert np.all(g.interior <= 1.0 + lam)

    @given(st.floats(-1, 1), st.floats(1e-12, 1e-2))
    @settings(max_examples=100, deadline=None)
    def test_bounds_property(self, phi_val, lam):
        spec = GridSpec(2, 2, 2, 0.5)
        g = edge_function(ScalarField.full(spec, phi_val), lam)
        assert np.all(g.interior >= lam - 1e-18)
        assert np.all(g.interior <= 1.0 + lam)

    def test_lambda_validation(self, spec4):
        with pytest.raises(ValueError):
            edge_function(ScalarField.full(spec4, 0.0), 0.0)

    def test_cross_section_shape(self, rng):
        # composing distance -> profile -> weight peaks at d = gamma and
        # decays to the floor in both bulks
        spec = GridSpec(32, 2, 2, 1.0 / 32)
        p = ModelParams(epsilon=0.05, gamma=0.25, dt=1e-4)
        d_line = np.abs(spec.axis_centers(0) - 0.0)  # distance from the x=0 plane
        d = ScalarField.from_interior(spec, np.broadcast_to(d_line[:, None, None], spec.shape).copy())
        g = edge_function(init_phi(d, p), p.lam)
        profile = g.interior[:, 0, 0]
        peak = np.argmax(profile)
        assert abs(d_line[peak] - p.gamma) <= spec.h
        assert profile[0] < 1e-3 and profile[-1] < 1e-3


class TestEpsilonFromCells:
    def test_printed_formula(self):
        h = 0.5 / 600
        expected = 5 * h / (2 * math.sqrt(2) * math.atanh(0.9))
        assert epsilon_from_cells(5, h) == pytest.approx(expected, rel=1e-15)

    def test_reported_value(self):
        # 1.5 cells at h = 2.5e-3 gives 9e-4 (rounded)
        assert epsilon_from_cells(1.5, 2.5e-3) == pytest.approx(9e-4, rel=1e-3)

    def test_linearity(self):
        h = 1.0 / 128
        assert epsilon_from_cells(6, h) == pytest.approx(2 * epsilon_from_cells(3, h), rel=1e-15)

    def test_positive_cells_required(self):
        with pytest.raises(ValueError):
            epsilon_from_cells(0.0, 0.01)

    def test_ninety_percent_width(self):
        # the profile tanh(x / (sqrt(2) eps)) spans 90% of its jump over m cells
        h = 0.01
        m = 4.0
        eps = epsilon_from_cells(m, h)
        half_width = m * h / 2
        assert math.tanh(half_width / (math.sqrt(2) * eps)) == pytest.approx(0.9, rel=1e-12)
