"""Crank-Nicolson / Adams-Bashforth (CNAB2) stepper."""

import logging
from typing import Tuple

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from ..exceptions import SingularTridiagonal
from .base import BaseStepper, StepperFactory
from .state import PerturbationState
from .tendencies import explicit_terms

logger = logging.getLogger(__name__)


@StepperFactory.register
class ImexStepper(BaseStepper):
    """d_y^2 by Crank-Nicolson, every other term by AB2 (forward Euler on the first step).

    u carries Dirichlet rows at both ends; b carries the one-sided Neumann row
    at the wall and a Dirichlet row at y_max. The banded systems are factorized
    once and solved for all x columns at the same time.
    """

    scheme = "imex-cn"

    def _setup(self) -> None:
        grid = self.grid
        dt = self.cfg.dt
        eye = sparse.identity(grid.ny, format="lil")
        d2 = grid.d2.tolil()

        self._explicit_op = (eye + 0.5 * dt * d2).tocsr()

        a_u = (eye - 0.5 * dt * d2).tolil()
        a_u[0, :] = 0.0
        a_u[0, 0] = 1.0
        a_u[-1, :] = 0.0
        a_u[-1, -1] = 1.0

        a_b = (eye - 0.5 * dt * d2).tolil()
        a_b[0, :] = grid.d1.getrow(0).toarray()
        a_b[-1, :] = 0.0
        a_b[-1, -1] = 1.0

        try:
            self._lu_u = splu(a_u.tocsc())
            self._lu_b = splu(a_b.tocsc())
        except RuntimeError as e:
            raise SingularTridiagonal(f"implicit diffusion operator is singular: {e}") from e
        logger.debug(f"Factorized CN operators (ny={grid.ny}, dt={dt:g})")

    def _advance(
        self, s: PerturbationState
    ) -> Tuple[np.ndarray, np.ndarray, Tuple[np.ndarray, np.ndarray]]:
        dt = self.cfg.dt
        u, b = s.u.values, s.b.values
        nu, nb = explicit_terms(self.grid, u, b, s.shear, s.b_bar)
        if s.history is None:
            eu, eb = nu, nb
        else:
            eu = 1.5 * nu - 0.5 * s.history[0]
            eb = 1.5 * nb - 0.5 * s.history[1]

        ru = np.asarray(self._explicit_op @ u) + dt * eu
        rb = np.asarray(self._explicit_op @ b) + dt * eb
        ru[0] = ru[-1] = 0.0
        rb[0] = rb[-1] = 0.0
        u_new = self._lu_u.solve(np.ascontiguousarray(ru))
        b_new = self._lu_b.solve(np.ascontiguousarray(rb))
        return u_new, b_new, (nu, nb)
