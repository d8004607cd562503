import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phaseshell import GridSpec, ScalarField, grad_inner_e, grad_norm_sq, h_norm_sq, inner_h, laplacian7, sync_ghosts

from _oracles import fsum_inner, neumann_laplacian_matrix
from conftest import random_field


class TestGridSpec:
    def test_geometry(self):
        spec = GridSpec(4, 6, 8, 0.5, origin=(1.0, 2.0, 3.0))
        assert (spec.lx, spec.ly, spec.lz) == (2.0, 3.0, 4.0)
        assert spec.n_cells == 192
        # first cell center is half a cell in from the origin
        assert spec.axis_centers(0)[0] == pytest.approx(1.25)
        np.testing.assert_allclose(spec.cell_centers()[0, 0, 0], [1.25, 2.25, 3.25])
        np.testing.assert_allclose(spec.cell_centers()[-1, -1, -1], [2.75, 4.75, 6.75])

    @pytest.mark.parametrize("bad", [dict(nx=1), dict(ny=0), dict(h=0.0), dict(h=-1.0)])
    def test_invariants(self, bad):
        kwargs = dict(nx=4, ny=4, nz=4, h=0.25)
        kwargs.update(bad)
        with pytest.raises(ValueError):
            GridSpec(**kwargs)


class TestSyncGhosts:
    def test_face_value_mirrors(self, spec4):
        f = ScalarField(spec4)
        f.interior[0, 1, 2] = 3.7
        out = sync_ghosts(f)
        assert out.data[0, 2, 3] == 3.7

    def test_constant_field(self, spec4):
        out = sync_ghosts(ScalarField.full(spec4, 2.5))
        assert np.all(out.data == 2.5)

    def test_random_field_cell_by_cell(self, spec4, rng):
        d = random_field(spec4, rng).data
        np.testing.assert_array_equal(d[0, 1:-1, 1:-1], d[1, 1:-1, 1:-1])
        np.testing.assert_array_equal(d[-1, 1:-1, 1:-1], d[-2, 1:-1, 1:-1])
        np.testing.assert_array_equal(d[1:-1, 0, 1:-1], d[1:-1, 1, 1:-1])
        np.testing.assert_array_equal(d[1:-1, -1, 1:-1], d[1:-1, -2, 1:-1])
        np.testing.assert_array_equal(d[1:-1, 1:-1, 0], d[1:-1, 1:-1, 1])
        np.testing.assert_array_equal(d[1:-1, 1:-1, -1], d[1:-1, 1:-1, -2])

    def test_boundary_forward_differences_vanish(self, spec4, rng):
        d = random_field(spec4, rng).data
        assert np.all(d[1, 1:-1, 1:-1] - d[0, 1:-1, 1:-1] == 0.0)
        assert np.all(d[-1, 1:-1, 1:-1] - d[-2, 1:-1, 1:-1] == 0.0)


class TestLaplacian:
    def test_constant_is_annihilated(self, spec4):
        out = laplacian7(ScalarField.full(spec4, 4.2))
        np.testing.assert_array_equal(out.interior, 0.0)

    def test_exact_on_quadratic(self):
        spec = GridSpec(6, 5, 4, 0.2)
        x = spec.cell_centers()[..., 0]
        f = ScalarField.from_interior(spec, x * x)
        out = laplacian7(f)
        # mirror ghosts break the quadratic only in the boundary x-layers
        np.testing.assert_allclose(out.interior[1:-1, :, :], 2.0, atol=1e-10)

    def test_matches_dense_stencil_matrix(self, spec4, rng):
        f = random_field(spec4, rng)
        lap = neumann_laplacian_matrix(spec4.shape, spec4.h)
        expected = (lap @ f.interior.ravel()).reshape(spec4.shape)
        np.testing.assert_allclose(laplacian7(f).interior, expected, atol=1e-11)

    def test_symmetric_in_inner_product(self, spec4, rng):
        a, b = random_field(spec4, rng), random_field(spec4, rng)
        lhs = inner_h(a, laplacian7(b))
        rhs = inner_h(b, laplacian7(a))
        assert lhs == pytest.approx(rhs, abs=1e-11)


class TestInnerH:
    def test_unit_field(self):
        spec = GridSpec(4, 4, 4, 0.25)
        ones = ScalarField.full(spec, 1.0)
        assert inner_h(ones, ones) == pytest.approx(1.0, abs=1e-15)

    def test_zero_factor(self, spec4, rng):
        a = random_field(spec4, rng)
        assert inner_h(a, ScalarField(spec4)) == 0.0

    def test_matches_fsum_oracle(self, spec8, rng):
        a, b = random_field(spec8, rng), random_field(spec8, rng)
        expected = fsum_inner(a.interior, b.interior, spec8.h)
        assert inner_h(a, b) == pytest.approx(expected, rel=1e-13)

    def test_grid_mismatch(self, spec4, spec8):
        with pytest.raises(ValueError, match="mismatch"):
            inner_h(ScalarField(spec4), ScalarField(spec8))

    def test_positive_definite(self, spec4, rng):
        a = random_field(spec4, rng)
        assert h_norm_sq(a) > 0.0

    @given(c1=st.floats(-10, 10), c2=st.floats(-10, 10))
    @settings(max_examples=25, deadline=None)
    def test_bilinear_symmetric(self, c1, c2):
        spec = GridSpec(3, 3, 3, 0.5)
        rng = np.random.default_rng(7)
        a, b, c = (random_field(spec, rng) for _ in range(3))
        combo = ScalarField(spec, c1 * a.data + c2 * b.data)
        lhs = inner_h(combo, c)
        rhs = c1 * inner_h(a, c) + c2 * inner_h(b, c)
        assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)
        assert inner_h(a, b) == pytest.approx(inner_h(b, a), rel=1e-14, abs=1e-15)


class TestGradInnerE:
    def test_constant_gradient_vanishes(self, spec4):
        assert grad_norm_sq(ScalarField.full(spec4, 3.0)) == 0.0

    def test_single_spike_six_edges(self):
        spec = GridSpec(4, 4, 4, 1.0)
        f = ScalarField(spec)
        f.interior[1, 1, 1] = 1.0
        f = sync_ghosts(f)
        # six incident unit edges, each contributing h^3 (1/h)^2 = 1
        assert grad_norm_sq(f) == pytest.approx(6.0, abs=1e-14)

    def test_summation_by_parts(self, spec8, rng):
        for _ in range(10):
            a, b = random_field(spec8, rng), random_field(spec8, rng)
            lhs = inner_h(a, laplacian7(b))
            rhs = -grad_inner_e(a, b)
            scale = np.sqrt(h_norm_sq(a)) * np.sqrt(grad_norm_sq(b)) + 1.0
            assert abs(lhs - rhs) <= 1e-12 * scale

    def test_grid_mismatch(self, spec4, spec8):
        with pytest.raises(ValueError, match="mismatch"):
            grad_inner_e(ScalarField(spec4), ScalarField(spec8))


class TestScalarField:
    def test_from_interior_shape_check(self, spec4):
        with pytest.raises(ValueError, match="interior shape"):
            ScalarField.from_interior(spec4, np.zeros((3, 3, 3)))

    def test_padded_shape_check(self, spec4):
        with pytest.raises(ValueError, match="padded shape"):
            ScalarField(spec4, np.zeros((4, 4, 4)))

    def test_copy_is_independent(self, spec4, rng):
        a = random_field(spec4, rng)
        b = a.copy()
        b.interior[0, 0, 0] += 1.0
        assert a.interior[0, 0, 0] != b.interior[0, 0, 0]
