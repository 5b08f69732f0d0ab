"""Tests for the mhdlayer command line and the verification report."""

import json
import os
import tempfile

import numpy as np
import pandas as pd
import pytest

from mhdlayer import __version__
from mhdlayer.cli import EXIT_CONFIG, EXIT_OK, EXIT_VERIFY, build_parser, main
from mhdlayer.config import RunConfig
from mhdlayer.field_core import Field, Grid, save_snapshot
from mhdlayer.verification import SUITES, run_verification

SMALL_RUN = {
    "grid": {"nx": 16, "ny": 64, "y_max": 10.0},
    "solver": {"dt": 0.002, "t_max": 0.02, "cfl_check": False},
    "norms": {"sample_every": 5},
    "lifespan": {"epsilons": [0.01], "b_bars": [1.0]},
    "verify": {"n_samples": 12},
}


def write_config(directory, data):
    path = os.path.join(directory, "run.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh)
    return path


class TestParser:
    """Argument parsing."""

    def test_version(self, capsys):
        with pytest.raises(SystemExit) as info:
            main(["--version"])
        assert info.value.code == 0
        assert f"mhdlayer v{__version__}" in capsys.readouterr().out

    def test_command_required(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args([])

    def test_common_flags(self):
        args = build_parser().parse_args(["sweep", "--jobs", "3", "--seed", "5", "--quiet"])
        assert args.jobs == 3
        assert args.seed == 5
        assert args.quiet

    def test_repeatable_suite(self):
        args = build_parser().parse_args(["verify", "--suite", "heat", "--suite", "roundtrip"])
        assert args.suite == ["heat", "roundtrip"]


class TestExitCodes:
    """Exit codes of the subcommands."""

    def test_missing_config(self):
        assert main(["verify", "--config", "/nonexistent/run.json"]) == EXIT_CONFIG

    def test_invalid_config(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = write_config(tmp, {"grid": {"nx": 7}})
            assert main(["shear", "--config", path, "--out", tmp]) == EXIT_CONFIG

    def test_unknown_suite(self):
        with tempfile.TemporaryDirectory() as tmp:
            assert main(["verify", "--suite", "nosuch", "--out", tmp]) == EXIT_CONFIG

    def test_verify_passes(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = write_config(tmp, SMALL_RUN)
            code = main(
                ["verify", "--config", path, "--suite", "heat", "--suite", "roundtrip",
                 "--out", tmp]
            )
            report = json.loads(open(os.path.join(tmp, "verify_report.json")).read())
            assert os.path.exists(os.path.join(tmp, "manifest.json"))
        assert code == EXIT_OK
        assert report["passed"] is True
        assert set(report["suites"]) == {"heat", "roundtrip"}
        assert report["suites"]["heat"]["worst"] <= 1e-6

    def test_broken_stencil_fails_verification(self):
        data = dict(SMALL_RUN, verify={"n_samples": 12, "stencil_scale": 0.5})
        with tempfile.TemporaryDirectory() as tmp:
            path = write_config(tmp, data)
            code = main(["verify", "--config", path, "--suite", "poincare", "--out", tmp])
            report = json.loads(open(os.path.join(tmp, "verify_report.json")).read())
        assert code == EXIT_VERIFY
        assert report["passed"] is False
        assert report["stencil_scale"] == 0.5
        assert report["suites"]["poincare"]["failures"]


class TestCommands:
    """Outputs of the subcommands."""

    def test_synthetic_sweep(self):
        with tempfile.TemporaryDirectory() as tmp:
            code = main(["sweep", "--synthetic-exponent", "1.7", "--quiet", "--out", tmp])
            summary = pd.read_csv(os.path.join(tmp, "sweep_summary.csv"))
            manifest = json.loads(open(os.path.join(tmp, "manifest.json")).read())
            assert os.path.exists(os.path.join(tmp, "stabilization.csv"))
        assert code == EXIT_OK
        assert list(summary.columns) == ["epsilon", "b_bar", "T_end", "end_reason", "tau_final"]
        assert len(summary) == 8
        assert manifest["command"] == "sweep"
        assert manifest["sweep"]["fits"]["1.0"]["lam_fit"] == pytest.approx(1.7, abs=1e-10)

    def test_simulate(self, capsys):
        with tempfile.TemporaryDirectory() as tmp:
            path = write_config(tmp, SMALL_RUN)
            code = main(["simulate", "--config", path, "--epsilon", "0.01", "--out", tmp])
            record = json.loads(open(os.path.join(tmp, "record.json")).read())
            trace = pd.read_csv(os.path.join(tmp, "trace.csv"))
        assert code == EXIT_OK
        assert record["end_reason"] == "horizon"
        assert "tau" in trace.columns
        assert "horizon" in capsys.readouterr().out

    def test_norms(self):
        grid = Grid(8, 64, y_max=10.0)
        u = Field.from_function(grid, lambda x, y: np.cos(x) * np.exp(-(y**2)))
        with tempfile.TemporaryDirectory() as tmp:
            snap = save_snapshot(os.path.join(tmp, "snap.npz"), grid, {"u": u}, {"t": 0.0})
            code = main(["norms", str(snap), "--tau", "0.1", "--out", tmp])
            table = pd.read_csv(os.path.join(tmp, "norms.csv"))
        assert code == EXIT_OK
        assert set(table["field"]) == {"u"}
        assert len(table) == RunConfig().norms.m_max + 2

    def test_norms_missing_field(self):
        grid = Grid(8, 64, y_max=10.0)
        with tempfile.TemporaryDirectory() as tmp:
            snap = save_snapshot(
                os.path.join(tmp, "snap.npz"), grid, {"u": Field.zeros(grid)}, {"t": 0.0}
            )
            assert main(["norms", str(snap), "--field", "w", "--out", tmp]) == EXIT_CONFIG


class TestVerificationReport:
    """Report structure from the library entry point."""

    def test_all_suites_registered(self):
        assert set(SUITES) == {
            "poincare", "summed_poincare", "roundtrip", "psi_residual", "heat", "equilibrium"
        }

    def test_report_dict(self):
        cfg = RunConfig.from_dict(SMALL_RUN)
        report = run_verification(cfg, ["equilibrium"])
        data = report.to_dict()
        assert data["passed"] is True
        assert data["seed"] == 0
        assert data["suites"]["equilibrium"]["n_samples"] == 10_000
        assert data["suites"]["equilibrium"]["worst"] == 0.0

    def test_equilibrium_steps_configurable(self):
        cfg = RunConfig.from_dict(dict(SMALL_RUN, verify={"equilibrium_steps": 50}))
        result = run_verification(cfg, ["equilibrium"]).to_dict()["suites"]["equilibrium"]
        assert result["n_samples"] == 50
        assert result["passed"] is True

    def test_same_seed_same_report(self):
        cfg = RunConfig.from_dict(SMALL_RUN)
        a = run_verification(cfg, ["poincare"]).to_dict()
        b = run_verification(cfg, ["poincare"]).to_dict()
        assert a == b


if __name__ == "__main__":
    pytest.main([__file__])
