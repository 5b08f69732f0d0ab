"""Tests for grids, fields and the discrete calculus."""

import math
import os
import tempfile

import numpy as np
import pytest

from mhdlayer.exceptions import DomainError, FieldError, GridError, NonFiniteWeightProduct
from mhdlayer.field_core import (
    Field,
    GaussianWeight,
    Grid,
    cumint_y,
    ddx,
    ddy,
    load_snapshot,
    quadrature_weights,
    save_snapshot,
    theta_times,
    weighted_l2,
)


class TestGrid:
    """Test cases for Grid construction."""

    def test_rejects_odd_nx(self):
        with pytest.raises(GridError):
            Grid(15, 32)

    def test_rejects_too_few_y_nodes(self):
        with pytest.raises(GridError):
            Grid(16, 4)

    def test_rejects_nonpositive_y_max(self):
        with pytest.raises(GridError):
            Grid(16, 32, y_max=0.0)

    @pytest.mark.parametrize("scale", [0.0, -1.0, math.inf, math.nan])
    def test_rejects_bad_stencil_scale(self, scale):
        with pytest.raises(GridError, match="stencil_scale"):
            Grid(16, 32, stencil_scale=scale)

    def test_stretched_nodes_cluster_at_wall(self):
        grid = Grid(8, 64, y_max=10.0, stretch=3.0)
        h = np.diff(grid.y)
        assert grid.y[0] == 0.0
        assert grid.y[-1] == 10.0
        assert h[0] < h[-1]

    def test_metadata_roundtrip(self):
        grid = Grid(8, 40, y_max=7.0, stretch=1.0)
        assert Grid(**grid.metadata()).matches(grid)


class TestDerivatives:
    """Spectral x-derivatives and finite-difference y-derivatives."""

    def setup_method(self):
        self.grid = Grid(32, 200, y_max=2.0)

    def test_ddx_of_sine(self):
        f = Field.from_function(self.grid, lambda x, y: np.sin(3 * x) * (1 + y))
        expected = 3 * np.cos(3 * self.grid.x)[None, :] * (1 + self.grid.y)[:, None]
        assert np.max(np.abs(ddx(f).values - expected)) < 1e-10

    def test_ddx_second_order(self):
        f = Field.from_function(self.grid, lambda x, y: np.cos(2 * x) + 0 * y)
        assert np.allclose(ddx(f, 2).values, -4 * np.cos(2 * self.grid.x)[None, :], atol=1e-10)

    def test_ddx_drops_nyquist_mode(self):
        nyquist = self.grid.nx // 2
        f = Field.from_function(self.grid, lambda x, y: np.cos(nyquist * x) + 0 * y)
        assert ddx(f).sup() < 1e-12

    def test_ddx_of_constant_is_zero(self):
        f = Field(self.grid, 5.0)
        assert ddx(f).sup() < 1e-12

    def test_ddy_exact_on_cubics(self):
        f = Field.from_function(self.grid, lambda x, y: y**3 + 0 * x)
        y = self.grid.y[:, None]
        assert np.max(np.abs(ddy(f).values - 3 * y**2)) < 1e-8
        assert np.max(np.abs(ddy(f, 2).values - 6 * y)) < 1e-6

    def test_ddy_fourth_order_convergence(self):
        errors = []
        for ny in (41, 81):
            grid = Grid(4, ny, y_max=math.pi)
            f = Field.from_function(grid, lambda x, y: np.sin(y) + 0 * x)
            errors.append(np.max(np.abs(ddy(f).values - np.cos(grid.y)[:, None])))
        assert errors[0] / errors[1] > 12.0

    def test_ddy_rejects_third_order(self):
        with pytest.raises(ValueError):
            ddy(Field.zeros(self.grid), 3)

    def test_stencil_scale_multiplies_operator(self):
        broken = Grid(32, 200, y_max=2.0, stencil_scale=1.1)
        f = Field.from_function(broken, lambda x, y: y + 0 * x)
        assert np.allclose(ddy(f).values, 1.1)


class TestCumint:
    """Cumulative integral from the wall."""

    def setup_method(self):
        self.grid = Grid(8, 101, y_max=3.0)

    def test_wall_value_is_zero(self):
        f = Field.from_function(self.grid, lambda x, y: np.cos(x) * np.exp(-y))
        assert np.all(cumint_y(f).values[0] == 0.0)

    def test_exact_on_cubic_integrands(self):
        f = Field.from_function(self.grid, lambda x, y: 3 * y**2 + 0 * x)
        expected = self.grid.y[:, None] ** 3
        assert np.max(np.abs(cumint_y(f).values - expected)) < 1e-10

    def test_derivative_inverts_integral(self):
        f = Field.from_function(self.grid, lambda x, y: np.sin(x) * np.exp(-(y**2)))
        back = ddy(cumint_y(f))
        assert np.max(np.abs(back.values - f.values)) < 1e-4

    def test_quadrature_weights_integrate_gaussian(self):
        y = np.linspace(0.0, 12.0, 401)
        total = np.sum(quadrature_weights(y) * np.exp(-(y**2)))
        assert abs(total - math.sqrt(math.pi) / 2) < 1e-7


class TestGaussianWeight:
    """Weighted products and their overflow handling."""

    def test_alpha_outside_range(self):
        with pytest.raises(DomainError):
            GaussianWeight(0.6, 0.0)
        with pytest.raises(DomainError):
            GaussianWeight(0.2, 0.0)

    def test_negative_time(self):
        with pytest.raises(DomainError):
            GaussianWeight(0.5, -1.0)

    def test_weight_values(self):
        w = GaussianWeight(0.5, 1.0)
        assert w.values(np.array([2.0]))[0] == pytest.approx(math.exp(0.5 * 4 / 8))

    def test_large_weights_use_log_space(self):
        y = np.linspace(0.0, 100.0, 11)
        w = GaussianWeight(0.5, 0.0)
        values = np.exp(-(y**2))
        prod = theta_times(y, values, w)
        expected = np.exp(-0.875 * y**2)
        assert np.all(np.isfinite(prod))
        assert np.allclose(prod, expected, rtol=1e-10, atol=0.0)

    def test_slow_decay_raises(self):
        y = np.linspace(0.0, 100.0, 11)
        with pytest.raises(NonFiniteWeightProduct):
            theta_times(y, np.ones_like(y), GaussianWeight(0.5, 0.0))

    def test_weighted_l2_of_gaussian(self):
        grid = Grid(8, 801, y_max=20.0)
        w = GaussianWeight(0.5, 0.0)
        f = Field.from_function(grid, lambda x, y: np.exp(-0.125 * y**2) + 0 * x)
        # theta f = 1 inside the strip, so the norm is sqrt(L_x * y_max)
        assert weighted_l2(f, w) == pytest.approx(math.sqrt(2 * math.pi * 20.0), rel=1e-10)


class TestField:
    """Field construction and arithmetic."""

    def setup_method(self):
        self.grid = Grid(8, 16, y_max=4.0)

    def test_nonfinite_samples_rejected(self):
        values = np.zeros(self.grid.shape)
        values[3, 2] = np.nan
        with pytest.raises(FieldError):
            Field(self.grid, values)

    def test_shape_mismatch_rejected(self):
        with pytest.raises(FieldError):
            Field(self.grid, np.zeros((3, 3)))

    def test_values_are_read_only(self):
        f = Field.zeros(self.grid)
        with pytest.raises(ValueError):
            f.values[0, 0] = 1.0

    def test_arithmetic(self):
        a = Field(self.grid, 2.0)
        b = Field(self.grid, 3.0)
        assert np.all((a + b).values == 5.0)
        assert np.all((a - b).values == -1.0)
        assert np.all((2 * b).values == 6.0)
        assert (-a).sup() == 2.0

    def test_fields_on_different_grids(self):
        other = Grid(8, 16, y_max=5.0)
        with pytest.raises(FieldError):
            Field.zeros(self.grid) + Field.zeros(other)

    def test_roll_x(self):
        f = Field.from_function(self.grid, lambda x, y: np.cos(x) + 0 * y)
        assert np.allclose(f.roll_x(self.grid.nx).values, f.values)


class TestSnapshot:
    """Snapshot persistence."""

    def test_save_and_load(self):
        grid = Grid(8, 24, y_max=6.0, stretch=2.0)
        f = Field.from_function(grid, lambda x, y: np.sin(x) * np.exp(-y))
        with tempfile.TemporaryDirectory() as tmp:
            path = save_snapshot(os.path.join(tmp, "snap.npz"), grid, {"u": f}, {"t": 0.5})
            loaded_grid, arrays, metadata = load_snapshot(path)
        assert loaded_grid.matches(grid)
        assert np.array_equal(arrays["u"], f.values)
        assert metadata == {"t": 0.5}


if __name__ == "__main__":
    pytest.main([__file__])
