"""Tests for the magnetic cancellation transform."""

import numpy as np
import pytest

from mhdlayer.cancellation import (
    compute_psi,
    from_tilde,
    norm_comparison,
    psi_residual,
    to_tilde,
)
from mhdlayer.field_core import Field, Grid
from mhdlayer.shear import erf_shear
from mhdlayer.solver import PerturbationState, chain_rule_tendency, rhs_transformed


def make_state(grid, amplitude=0.1, b_bar=1.0, t=0.0, u_bar=1.0):
    u = Field.from_function(grid, lambda x, y: amplitude * np.sin(x) * y * np.exp(-0.5 * y**2))
    b = Field.from_function(
        grid, lambda x, y: amplitude * (np.cos(x) + 0.5 * np.sin(2 * x)) * np.exp(-0.5 * y**2)
    )
    return PerturbationState.from_fields(u, b, erf_shear(t, u_bar, grid), b_bar=b_bar)


class TestTransform:
    """Forward and inverse transform."""

    def setup_method(self):
        self.grid = Grid(8, 128, y_max=12.0)

    def test_roundtrip(self):
        s = make_state(self.grid, t=2.0)
        back = from_tilde(to_tilde(s))
        assert np.max(np.abs(back.u.values - s.u.values)) <= 1e-12 * s.u.sup()
        assert np.array_equal(back.b.values, s.b.values)

    def test_b_tilde_is_b(self):
        s = make_state(self.grid)
        assert to_tilde(s).b_tilde is s.b

    def test_flat_shear_is_identity(self):
        s = make_state(self.grid, u_bar=0.0)
        assert np.array_equal(to_tilde(s).u_tilde.values, s.u.values)

    def test_psi_vanishes_at_wall(self):
        ts = to_tilde(make_state(self.grid))
        defects = ts.boundary_defects()
        assert defects["psi_wall"] == 0.0
        assert defects["u_tilde_wall"] == 0.0

    def test_psi_is_antiderivative_of_b(self):
        s = make_state(self.grid)
        psi = compute_psi(s.b)
        increments = self.grid.cell_weights @ s.b.values
        assert np.array_equal(psi.values[1:], np.cumsum(increments, axis=0))

    def test_inverse_regenerates_normals(self):
        s = make_state(self.grid)
        back = from_tilde(to_tilde(s))
        assert np.allclose(back.v.values, s.v.values, atol=1e-14)
        assert np.allclose(back.g.values, s.g.values, atol=1e-14)


class TestTransformedSystem:
    """Transformed right-hand side against the chain rule applied to the primitive one."""

    def setup_method(self):
        self.grid = Grid(8, 401, y_max=12.0)

    @pytest.mark.parametrize("b_bar", [1.0, 0.5, 0.0])
    def test_consistency(self, b_bar):
        s = make_state(self.grid, b_bar=b_bar, t=0.5)
        du_t, db_t = rhs_transformed(to_tilde(s))
        du_c, db_c = chain_rule_tendency(s)
        scale = max(du_c.sup(), db_c.sup())
        assert (du_t - du_c).sup() < 1e-3 * scale
        assert (db_t - db_c).sup() < 1e-3 * scale


class TestPsiResidual:
    """Residual of the stream-function equation."""

    def setup_method(self):
        self.grid = Grid(8, 64, y_max=10.0)

    def test_steady_zero_state(self):
        s0 = make_state(self.grid, amplitude=0.0)
        s1 = make_state(self.grid, amplitude=0.0, t=0.01)
        assert psi_residual(s0, s1, 0.01).sup() == 0.0

    def test_forcing_is_subtracted(self):
        s0 = make_state(self.grid)
        base = psi_residual(s0, s0, 0.01)
        forced = psi_residual(s0, s0, 0.01, forcing=base)
        assert forced.sup() == 0.0


class TestNormComparison:
    """Equivalence of the primitive and transformed X norms."""

    def test_both_directions_hold(self):
        grid = Grid(8, 256, y_max=20.0)
        result = norm_comparison(make_state(grid), tau=0.25, alpha=0.5, C=10.0)
        assert result.holds
        data = result.to_dict()
        assert data["primitive_bound"] == pytest.approx(result.u_tilde + 10.0 * result.b)

    def test_flat_shear_norms_agree(self):
        grid = Grid(8, 256, y_max=20.0)
        result = norm_comparison(make_state(grid, u_bar=0.0), tau=0.25, alpha=0.5, C=1.0)
        assert result.u == result.u_tilde


if __name__ == "__main__":
    pytest.main([__file__])
