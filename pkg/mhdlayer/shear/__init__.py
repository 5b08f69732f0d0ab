"""Background shear flow: exact data, Crank-Nicolson stepping and decay checks."""

from .base import BaseShearDatum, ShearDatumFactory, ShearProfile
from .cutoff_datum import CutoffDatum, cutoff_shear, smooth_cutoff
from .erf_datum import ErfDatum, erf_shear
from .heat_solver import evolve_heat, heat_trace, step_heat
from .hypothesis import HReport, shear_trace, verification_nodes, verify_H

__all__ = [
    "BaseShearDatum",
    "ShearDatumFactory",
    "ShearProfile",
    "CutoffDatum",
    "ErfDatum",
    "cutoff_shear",
    "erf_shear",
    "smooth_cutoff",
    "evolve_heat",
    "heat_trace",
    "step_heat",
    "HReport",
    "shear_trace",
    "verification_nodes",
    "verify_H",
]
