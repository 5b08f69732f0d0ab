"""Tests for the background shear flow."""

import math

import numpy as np
import pytest

from mhdlayer.exceptions import ConfigError, DomainError, InsufficientSamples
from mhdlayer.field_core import Grid
from mhdlayer.shear import (
    CutoffDatum,
    ErfDatum,
    ShearDatumFactory,
    erf_shear,
    evolve_heat,
    heat_trace,
    shear_trace,
    smooth_cutoff,
    step_heat,
    verification_nodes,
    verify_H,
)


class TestErfShear:
    """Closed-form error-function profile."""

    def test_known_value(self):
        p = erf_shear(1.0, 1.0, np.array([0.0, 2.0]))
        assert p.values[0] == 0.0
        assert p.values[1] == pytest.approx(0.6826894921370859, abs=1e-14)

    def test_far_field(self):
        p = erf_shear(0.0, 2.5, np.array([40.0]))
        assert p.values[0] == pytest.approx(2.5, abs=1e-12)

    def test_derivatives_match_finite_differences(self):
        y = np.linspace(0.0, 10.0, 2001)
        p = erf_shear(0.5, 1.0, y)
        assert np.allclose(np.gradient(p.values, y)[1:-1], p.dy1[1:-1], atol=1e-5)
        assert np.allclose(np.gradient(p.dy1, y)[1:-1], p.dy2[1:-1], atol=1e-5)

    def test_dy3_is_time_derivative_of_dy1(self):
        y = np.linspace(0.0, 8.0, 101)
        h = 1e-5
        forward = erf_shear(1.0 + h, 1.0, y).dy1
        backward = erf_shear(1.0 - h, 1.0, y).dy1
        assert np.allclose((forward - backward) / (2 * h), erf_shear(1.0, 1.0, y).dy3, atol=1e-8)

    def test_accepts_grid(self):
        grid = Grid(8, 32, y_max=6.0)
        p = erf_shear(0.0, 1.0, grid)
        assert np.array_equal(p.y, grid.y)

    def test_negative_time(self):
        with pytest.raises(DomainError):
            erf_shear(-1.0, 1.0, np.array([0.0, 1.0]))

    def test_flat_profile_is_linear(self):
        assert erf_shear(0.0, 0.0, np.linspace(0.0, 1.0, 8)).is_linear()


class TestDatumFactory:
    """Datum selection by name."""

    def test_available(self):
        assert ShearDatumFactory.available() == ["cutoff", "erf"]

    def test_create(self):
        datum = ShearDatumFactory.create("erf", 2.0)
        assert isinstance(datum, ErfDatum)
        assert datum.u_bar == 2.0

    def test_unknown_datum(self):
        with pytest.raises(ConfigError):
            ShearDatumFactory.create("blasius")


class TestCutoffDatum:
    """Smooth cutoff datum and its evolution."""

    def test_cutoff_support(self):
        values, d1, _, _ = smooth_cutoff(np.array([0.5, 1.0, 1.5, 2.0, 3.0]))
        assert values[0] == 0.0 and values[1] == 0.0
        assert values[2] == pytest.approx(0.5)
        assert values[3] == 1.0 and values[4] == 1.0
        assert d1[2] > 0

    def test_evolution_is_continuous_at_zero(self):
        y = np.linspace(0.0, 6.0, 61)
        datum = CutoffDatum(1.0)
        early = datum.profile(1e-4, y)
        assert np.max(np.abs(early.values - datum.initial_values(y))) < 1e-2

    def test_matches_heat_stepper(self):
        y = np.linspace(0.0, 30.0, 3001)
        datum = CutoffDatum(1.0)
        stepped = evolve_heat(datum.profile(0.5, y), 1e-3, 500)
        exact = datum.profile(1.0, y)
        assert np.max(np.abs(stepped.values - exact.values)) < 1e-4

    def test_wall_value_stays_zero(self):
        y = np.linspace(0.0, 10.0, 201)
        assert abs(CutoffDatum(1.0).profile(2.0, y).values[0]) < 1e-12


class TestHeatStepper:
    """Crank-Nicolson shear solve."""

    def setup_method(self):
        self.y = np.linspace(0.0, 12.0, 2048)

    def test_matches_closed_form(self):
        stepped = evolve_heat(erf_shear(0.0, 1.0, self.y), 1e-3, 1000)
        assert stepped.t == pytest.approx(1.0)
        assert np.max(np.abs(stepped.values - erf_shear(1.0, 1.0, self.y).values)) < 1e-6

    def test_second_order_in_time(self):
        y = np.linspace(0.0, 12.0, 241)
        p = erf_shear(0.0, 1.0, y)
        reference = evolve_heat(p, 0.0025, 80)
        coarse = evolve_heat(p, 0.02, 10)
        fine = evolve_heat(p, 0.01, 20)
        e_coarse = np.max(np.abs(coarse.values - reference.values))
        e_fine = np.max(np.abs(fine.values - reference.values))
        assert 3.0 < e_coarse / e_fine < 5.0

    def test_preserves_monotonicity(self):
        y = np.linspace(0.0, 12.0, 241)
        stepped = evolve_heat(erf_shear(0.0, 1.0, y), 1e-3, 50)
        assert np.all(np.diff(stepped.values) >= -1e-12)

    def test_boundary_values(self):
        y = np.linspace(0.0, 12.0, 241)
        stepped = step_heat(erf_shear(0.0, 1.5, y), 0.01)
        assert stepped.values[0] == pytest.approx(0.0, abs=1e-12)
        assert stepped.values[-1] == pytest.approx(1.5, abs=1e-12)

    def test_rejects_nonpositive_dt(self):
        with pytest.raises(DomainError):
            step_heat(erf_shear(0.0, 1.0, self.y), 0.0)

    def test_trace_length(self):
        y = np.linspace(0.0, 12.0, 121)
        trace = heat_trace(erf_shear(0.0, 1.0, y), 0.01, 20, every=5)
        assert len(trace) == 5
        assert trace[-1].t == pytest.approx(0.2)


class TestDecayHypothesis:
    """Fitted decay exponents of the shear derivatives."""

    def test_erf_slopes(self):
        y = verification_nodes(10.0, 1000.0, 0.05)
        report = verify_H(shear_trace(ErfDatum(1.0), 10.0, 1000.0, 40, y), alpha=0.5)
        assert report.p1 == pytest.approx(-0.5, abs=0.01)
        assert report.p2 == pytest.approx(-1.0, abs=0.01)
        assert report.p3 == pytest.approx(-0.75, abs=0.01)
        assert report.l1_bound == pytest.approx(1.0, abs=1e-3)
        assert math.isfinite(report.C_H)

    def test_cutoff_slopes(self):
        y = verification_nodes(10.0, 1000.0, 0.05)
        report = verify_H(shear_trace(CutoffDatum(1.0), 10.0, 1000.0, 40, y), alpha=0.5)
        assert report.p1 == pytest.approx(-0.5, abs=0.1)
        assert report.p2 == pytest.approx(-1.0, abs=0.1)
        assert report.p3 == pytest.approx(-0.75, abs=0.1)

    def test_summary_frame(self):
        y = verification_nodes(10.0, 1000.0, 0.1)
        report = verify_H(shear_trace(ErfDatum(1.0), 10.0, 1000.0, 25, y))
        frame = report.to_frame()
        assert len(frame) == 25
        assert {"t", "sup_dy1", "sup_dy2", "l1_dy1", "weighted_dy2"} <= set(frame.columns)
        assert report.summary()["n_samples"] == 25

    def test_too_few_samples(self):
        y = verification_nodes(10.0, 1000.0, 0.1)
        with pytest.raises(InsufficientSamples):
            verify_H(shear_trace(ErfDatum(1.0), 10.0, 1000.0, 5, y))

    def test_window_too_short(self):
        y = verification_nodes(10.0, 50.0, 0.1)
        with pytest.raises(InsufficientSamples):
            verify_H(shear_trace(ErfDatum(1.0), 10.0, 50.0, 30, y))


if __name__ == "__main__":
    pytest.main([__file__])
