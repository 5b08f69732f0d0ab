"""Time integration of the MHD boundary-layer perturbation system."""

from .base import BaseStepper, StepperFactory, step
from .checkpoint import load_checkpoint, save_checkpoint
from .explicit_stepper import ExplicitStepper
from .imex_stepper import ImexStepper
from .kinematics import divergence_residual, recover_normal
from .state import PerturbationState, SolverConfig
from .tendencies import chain_rule_tendency, rhs_linearized, rhs_primitive, rhs_transformed

__all__ = [
    "BaseStepper",
    "StepperFactory",
    "step",
    "load_checkpoint",
    "save_checkpoint",
    "ExplicitStepper",
    "ImexStepper",
    "divergence_residual",
    "recover_normal",
    "PerturbationState",
    "SolverConfig",
    "chain_rule_tendency",
    "rhs_linearized",
    "rhs_primitive",
    "rhs_transformed",
]
