"""Tests for the radius ODE, the parameter schedule, runs and sweeps."""

import json
import math
import tempfile
from pathlib import Path

import numpy as np
import pytest

from mhdlayer.analytic_norms import norm_totals
from mhdlayer.config import RunConfig
from mhdlayer.exceptions import (
    CheckpointError,
    ConfigError,
    DegenerateFit,
    DomainError,
    RadiusCollapsed,
)
from mhdlayer.field_core import Grid
from mhdlayer.lifespan import (
    LifespanParams,
    NormTotals,
    TauTrace,
    calibrated_initial_data,
    decay_functional,
    fit_lifespan_exponent,
    run_experiment,
    stabilization_table,
    sweep,
    synthetic_records,
    tau_lower_bound,
    tau_step,
    theoretical_lifespan,
    uniqueness_diagnostic,
)
from mhdlayer.lifespan.params import EPSILON_FLOOR
from mhdlayer.lifespan.tau import weight_integrals
from mhdlayer.result import ExperimentRecord


def small_config(**lifespan):
    """A config small enough for a few solver steps in a test."""
    block = {"epsilons": [0.01], "b_bars": [1.0, 0.0]}
    block.update(lifespan)
    return RunConfig.from_dict(
        {
            "grid": {"nx": 16, "ny": 64, "y_max": 10.0},
            "solver": {"dt": 0.002, "t_max": 0.02, "cfl_check": False},
            "norms": {"sample_every": 5},
            "lifespan": block,
            "io": {"checkpoint_every": 5},
        }
    )


class TestLifespanParams:
    """Epsilon-dependent schedule."""

    def test_schedule(self):
        p = LifespanParams.from_epsilon(0.01, C=2.0)
        delta = 1.0 / math.log(100.0)
        assert p.delta == pytest.approx(delta)
        assert p.alpha == pytest.approx(0.5 - delta)
        assert p.beta1 == p.beta2 == pytest.approx(delta / 2)
        assert p.K == pytest.approx(8.0 / delta)
        assert p.eta1 == pytest.approx(delta)
        assert p.eta2 == pytest.approx(delta / 8)
        assert p.run_alpha == p.alpha

    def test_strict_rejects_large_epsilon(self):
        with pytest.raises(DomainError):
            LifespanParams.from_epsilon(0.2)
        with pytest.raises(DomainError):
            LifespanParams.from_epsilon(0.0)

    def test_non_strict_zero_epsilon_uses_floor(self):
        p = LifespanParams.from_epsilon(0.0, strict=False)
        assert p.epsilon == 0.0
        assert p.delta == pytest.approx(1.0 / math.log(1.0 / EPSILON_FLOOR))

    def test_non_strict_clips_alpha(self):
        p = LifespanParams.from_epsilon(0.2, strict=False)
        assert p.alpha < 0.25
        assert p.run_alpha == 0.25

    @pytest.mark.parametrize("lam", [1.4, 2.0])
    def test_lam_out_of_range(self, lam):
        with pytest.raises(DomainError):
            LifespanParams.from_epsilon(0.01, lam=lam)

    def test_ode_rate(self):
        p = LifespanParams.from_epsilon(0.01, C0=2.0)
        assert p.ode_rate == pytest.approx(3.0 * (p.K + 1.0))
        assert p.to_dict()["run_alpha"] == p.run_alpha


class TestRadiusOde:
    """Radius update and its trace."""

    def setup_method(self):
        self.p = LifespanParams.from_epsilon(0.01)

    def test_weight_integrals(self):
        w_x, w_d = weight_integrals(0.0, 1.0)
        assert w_x == pytest.approx(4.0 / 3.0 * (2.0**0.75 - 1.0))
        assert w_d == pytest.approx(0.8 * (2.0**1.25 - 1.0))
        assert weight_integrals(2.0, 2.0) == (0.0, 0.0)

    def test_constant_norms_are_integrated_exactly(self):
        u, b = NormTotals(1e-4, 2e-4), NormTotals(5e-5, 1e-4)
        single = tau_step(0.25, u, b, 1.0, self.p)
        times = np.linspace(0.0, 1.0, 51)
        trace = TauTrace.integrate(
            times, np.full(51, 1.5e-4), np.full(51, 3e-4), self.p, tau_init=0.25
        )
        assert len(trace.taus) == 51
        assert trace.current == pytest.approx(single, rel=1e-12)

    def test_tau_never_increases(self):
        zero = NormTotals(0.0, 0.0)
        assert tau_step(0.25, zero, zero, 0.1, self.p) <= 0.25
        tau = tau_step(0.25, NormTotals(0.01, 0.01), zero, 0.1, self.p)
        assert tau < 0.25

    def test_collapse(self):
        big = NormTotals(10.0, 10.0)
        with pytest.raises(RadiusCollapsed):
            tau_step(0.25, big, big, 1.0, self.p)
        with pytest.raises(RadiusCollapsed):
            tau_step(0.0, NormTotals(0.0, 0.0), NormTotals(0.0, 0.0), 0.1, self.p)

    def test_integrate_stops_before_collapse(self):
        times = np.linspace(0.0, 10.0, 101)
        trace = TauTrace.integrate(times, np.full(101, 0.01), np.full(101, 0.01), self.p)
        assert 1 < len(trace.taus) < 101
        assert np.all(np.diff(trace.taus) <= 0)

    def test_trace_rejects_increase(self):
        trace = TauTrace(tau_init=0.25)
        trace.append(0.1, 0.2)
        with pytest.raises(DomainError):
            trace.append(0.2, 0.21)
        assert list(trace.to_frame().columns) == ["t", "tau"]


class TestClosedForms:
    """Lifespan estimate, guaranteed radius and decay functional."""

    def test_theoretical_lifespan(self):
        assert theoretical_lifespan(math.exp(-1.0)) == pytest.approx(
            math.exp(2.0 / 3.0) - 1.0, rel=1e-12
        )
        # ln 100 = 4.60517, eps L^3 = 0.976646, exponent 2 - 4/6.60517 = 1.394414
        assert theoretical_lifespan(0.01) == pytest.approx(0.03350, rel=1e-3)
        assert theoretical_lifespan(0.01) > theoretical_lifespan(0.1)

    @pytest.mark.parametrize("eps", [0.0, 1.0, -0.5])
    def test_theoretical_lifespan_domain(self, eps):
        with pytest.raises(DomainError):
            theoretical_lifespan(eps)

    def test_tau_lower_bound(self):
        p = LifespanParams.from_epsilon(1e-12)
        at_zero = tau_lower_bound(p, 0.0)
        assert 0.0 < at_zero < p.tau0
        assert tau_lower_bound(p, 100.0) <= at_zero
        assert tau_lower_bound(p, 1e30) == 0.0

    def test_decay_functional(self):
        p = LifespanParams.from_epsilon(0.01)
        assert decay_functional(0.1, 0.2, p, 0.0) == pytest.approx(0.1 + p.K * 0.2)
        expected = (0.1 + p.K * 0.2) * 4.0 ** (0.25 - p.eta1)
        assert decay_functional(0.1, 0.2, p, 3.0) == pytest.approx(expected)


class TestInitialData:
    """Calibrated initial perturbations."""

    def setup_method(self):
        self.grid = Grid(16, 128, y_max=12.0)

    def test_calibrated_norm(self):
        u0, b0 = calibrated_initial_data(self.grid, 0.05, 0.25, seed=1)
        for f in (u0, b0):
            assert norm_totals(f, 0.5, 0.5, 0.0).X_total == pytest.approx(0.05, rel=1e-10)
        assert np.all(u0.values[0] == 0.0)

    def test_zero_epsilon(self):
        u0, b0 = calibrated_initial_data(self.grid, 0.0, 0.25)
        assert u0.sup() == 0.0 and b0.sup() == 0.0

    def test_seed_determinism(self):
        a = calibrated_initial_data(self.grid, 0.05, 0.25, seed=4)
        b = calibrated_initial_data(self.grid, 0.05, 0.25, seed=4)
        c = calibrated_initial_data(self.grid, 0.05, 0.25, seed=5)
        assert np.array_equal(a[0].values, b[0].values)
        assert not np.array_equal(a[0].values, c[0].values)

    @pytest.mark.parametrize("n_modes", [0, 8])
    def test_bad_mode_count(self, n_modes):
        with pytest.raises(ConfigError):
            calibrated_initial_data(self.grid, 0.05, 0.25, n_modes=n_modes)


class TestFits:
    """Lifespan exponent fits and the stabilization table."""

    def setup_method(self):
        self.eps = [0.2, 0.1, 0.05, 0.025]

    def test_recovers_synthetic_exponent(self):
        records = synthetic_records(self.eps, [1.0], 1.7, C_bar=3.0)
        fit = fit_lifespan_exponent(records, 1.0)
        assert fit.lam_fit == pytest.approx(1.7, abs=1e-10)
        assert fit.intercept == pytest.approx(math.log(3.0), abs=1e-10)
        assert fit.n_used == 4
        assert max(abs(r) for r in fit.residuals) < 1e-10

    def test_censored_and_failed_excluded(self):
        records = synthetic_records(self.eps, [1.0], 1.5)
        records.append(
            ExperimentRecord(0.0125, 1.0, 100.0, "horizon", 0.2)
        )
        records.append(ExperimentRecord(0.3, 1.0, math.nan, "failed", math.nan))
        fit = fit_lifespan_exponent(records, 1.0)
        assert fit.n_used == 4
        assert fit.n_censored == 1
        assert fit.n_failed == 1
        assert fit.lam_fit == pytest.approx(1.5, abs=1e-10)

    def test_degenerate_fit(self):
        records = synthetic_records([0.1], [1.0], 1.5)
        with pytest.raises(DegenerateFit):
            fit_lifespan_exponent(records, 1.0)

    def test_zero_epsilon_is_censored(self):
        records = synthetic_records([0.0, 0.1], [1.0], 1.5)
        assert records[0].end_reason == "horizon"
        assert records[0].censored
        assert not records[0].usable

    def test_unknown_end_reason(self):
        with pytest.raises(ValueError):
            ExperimentRecord(0.1, 1.0, 1.0, "timeout", 0.2)

    def test_stabilization_table(self):
        records = synthetic_records(self.eps, [1.0], 1.7) + synthetic_records(
            self.eps, [0.0], 1.5
        )
        table = stabilization_table(records)
        assert list(table.columns) == ["T_end_b0", "T_end_b1", "stabilized_1"]
        assert list(table.index) == sorted(self.eps, reverse=True)
        assert table["stabilized_1"].all()


class TestSweep:
    """Sweeps over (epsilon, b_bar)."""

    def test_synthetic_sweep(self):
        cfg = small_config(epsilons=[0.2, 0.1, 0.05, 0.025], synthetic_exponent=1.7)
        result = sweep(cfg, show_progress=False)
        assert len(result.records) == 8
        assert set(result.fits) == {1.0, 0.0}
        assert result.fits[1.0].lam_fit == pytest.approx(1.7, abs=1e-10)
        frame = result.summary_frame()
        assert {"epsilon", "b_bar", "T_end", "end_reason", "tau_final"} <= set(frame.columns)
        assert "0.1" in result.metadata["theoretical_lifespan"]

    def test_merge_order(self):
        cfg = small_config(epsilons=[0.2, 0.1], synthetic_exponent=1.5)
        result = sweep(cfg, b_bar_list=[0.0, 2.0], show_progress=False)
        cells = [(r.b_bar, r.epsilon) for r in result.records]
        assert cells == [(0.0, 0.2), (0.0, 0.1), (2.0, 0.2), (2.0, 0.1)]


class TestRunExperiment:
    """Single lifespan runs on a coarse grid."""

    def setup_method(self):
        self.cfg = small_config()

    def test_short_run_reaches_horizon(self):
        with tempfile.TemporaryDirectory() as tmp:
            record = run_experiment(self.cfg, epsilon=0.01, b_bar=1.0, out_dir=tmp)
            saved = json.loads(Path(tmp, "record.json").read_text(encoding="utf-8"))
            assert Path(tmp, "trace.csv").exists()
        assert record.end_reason == "horizon"
        assert record.steps == 10
        assert record.T_end == pytest.approx(0.02)
        assert 0.0 < record.tau_final <= 0.25
        assert list(record.trace["t"]) == pytest.approx([0.0, 0.01, 0.02])
        assert np.all(np.diff(record.trace["tau"].to_numpy()) <= 0)
        assert saved["end_reason"] == "horizon"

    def test_zero_perturbation(self):
        record = run_experiment(self.cfg, epsilon=0.0, b_bar=0.0)
        assert record.end_reason == "horizon"
        assert record.tau_final == pytest.approx(0.25)

    def test_restart_is_bitwise(self):
        with tempfile.TemporaryDirectory() as tmp:
            full = run_experiment(self.cfg, epsilon=0.01, b_bar=1.0, out_dir=tmp)
            checkpoint = Path(tmp, "checkpoints", "step_00000005.npz")
            resumed = run_experiment(self.cfg, epsilon=0.01, b_bar=1.0, restart=checkpoint)
        assert resumed.tau_final == full.tau_final
        assert resumed.T_end == full.T_end
        assert np.array_equal(resumed.trace.to_numpy(), full.trace.to_numpy())

    def test_restart_other_cell(self):
        with tempfile.TemporaryDirectory() as tmp:
            run_experiment(self.cfg, epsilon=0.01, b_bar=1.0, out_dir=tmp)
            checkpoint = Path(tmp, "checkpoints", "step_00000005.npz")
            with pytest.raises(CheckpointError):
                run_experiment(self.cfg, epsilon=0.01, b_bar=0.0, restart=checkpoint)

    def test_uniqueness_diagnostic(self):
        frame = uniqueness_diagnostic(self.cfg, epsilon=0.01, b_bar=1.0)
        assert list(frame.columns) == ["t", "tau", "diff_X", "diff_D", "X_coarse"]
        assert frame["diff_X"].iloc[0] == 0.0
        assert len(frame) == 3


if __name__ == "__main__":
    pytest.main([__file__])
