"""Fully explicit AB2 stepper, kept for comparison runs with small dt."""

from typing import Tuple

import numpy as np

from ..field_core import ddy_array
from .base import BaseStepper, StepperFactory
from .state import PerturbationState
from .tendencies import explicit_terms


@StepperFactory.register
class ExplicitStepper(BaseStepper):
    scheme = "explicit"

    def _advance(
        self, s: PerturbationState
    ) -> Tuple[np.ndarray, np.ndarray, Tuple[np.ndarray, np.ndarray]]:
        dt = self.cfg.dt
        u, b = s.u.values, s.b.values
        nu, nb = explicit_terms(self.grid, u, b, s.shear, s.b_bar)
        fu = nu + ddy_array(self.grid, u, 2)
        fb = nb + ddy_array(self.grid, b, 2)
        if s.history is None:
            return u + dt * fu, b + dt * fb, (fu, fb)
        u_new = u + dt * (1.5 * fu - 0.5 * s.history[0])
        b_new = b + dt * (1.5 * fb - 0.5 * s.history[1])
        return u_new, b_new, (fu, fb)
