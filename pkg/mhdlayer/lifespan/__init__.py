"""Lifespan lab: radius ODE, parameter schedule, runs, sweeps and scaling fits."""

from .experiment import run_experiment, transformed_norms
from .initial_data import calibrated_initial_data
from .params import LifespanParams
from .sweep import fit_lifespan_exponent, stabilization_table, sweep, synthetic_records
from .tau import (
    NormTotals,
    TauTrace,
    decay_functional,
    tau_lower_bound,
    tau_step,
    theoretical_lifespan,
)
from .uniqueness import uniqueness_diagnostic

__all__ = [
    "run_experiment",
    "transformed_norms",
    "calibrated_initial_data",
    "LifespanParams",
    "fit_lifespan_exponent",
    "stabilization_table",
    "sweep",
    "synthetic_records",
    "NormTotals",
    "TauTrace",
    "decay_functional",
    "tau_lower_bound",
    "tau_step",
    "theoretical_lifespan",
    "uniqueness_diagnostic",
]
