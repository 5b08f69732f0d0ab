"""
mhdlayer - Numerical lab for 2D MHD boundary layers around a shear flow.

Spectral-in-x / finite-difference-in-y fields, the heat-flow shear datum, an
IMEX perturbation solver, the magnetic cancellation transform, Gaussian-weighted
analytic semi-norms and the lifespan lab built on top of them.
"""

from .analytic_norms import NormBundle, apriori_monitor, poincare_check, seminorms
from .cancellation import TransformedState, from_tilde, psi_residual, to_tilde
from .config import InternalConfig, RunConfig, load_config
from .exceptions import ConfigError, LabError
from .field_core import Field, GaussianWeight, Grid
from .lifespan import LifespanParams, TauTrace, run_experiment, sweep
from .result import ExperimentRecord, SweepResult
from .shear import ShearDatumFactory, erf_shear, verify_H
from .solver import PerturbationState, SolverConfig, StepperFactory

__version__ = "0.3.0"
__all__ = [
    "NormBundle",
    "apriori_monitor",
    "poincare_check",
    "seminorms",
    "TransformedState",
    "from_tilde",
    "psi_residual",
    "to_tilde",
    "InternalConfig",
    "RunConfig",
    "load_config",
    "ConfigError",
    "LabError",
    "Field",
    "GaussianWeight",
    "Grid",
    "LifespanParams",
    "TauTrace",
    "run_experiment",
    "sweep",
    "ExperimentRecord",
    "SweepResult",
    "ShearDatumFactory",
    "erf_shear",
    "verify_H",
    "PerturbationState",
    "SolverConfig",
    "StepperFactory",
]
