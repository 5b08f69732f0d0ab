"""Solver configuration and the perturbation state."""

import logging
from dataclasses import dataclass, replace
from typing import Dict, Optional, Tuple

import numpy as np

from ..exceptions import ConfigError
from ..field_core import Field, Grid
from ..shear.base import ShearProfile
from .kinematics import recover_normal_array

logger = logging.getLogger(__name__)

SCHEMES = ("imex-cn", "explicit")


@dataclass(frozen=True)
class SolverConfig:
    """Time-stepping parameters."""

    dt: float = 1e-3
    t_max: float = 1.0
    scheme: str = "imex-cn"
    blowup_threshold: float = 1e3
    kappa: float = 1.0
    cfl_check: bool = True

    def __post_init__(self) -> None:
        if not self.dt > 0:
            raise ConfigError(f"solver.dt must be positive, got {self.dt}")
        if not self.t_max > 0:
            raise ConfigError(f"solver.t_max must be positive, got {self.t_max}")
        if self.scheme not in SCHEMES:
            raise ConfigError(f"solver.scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if not self.blowup_threshold > 0:
            raise ConfigError(
                f"solver.blowup_threshold must be positive, got {self.blowup_threshold}"
            )
        if self.kappa != 1.0:
            raise ConfigError(f"solver.kappa is fixed to 1, got {self.kappa}")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_max / self.dt))


@dataclass(frozen=True)
class PerturbationState:
    """Snapshot (u, v, b, g) around the shear flow at time t.

    ``history`` carries the explicit tendencies of the previous step for the
    two-step Adams-Bashforth part; ``None`` before the first step. ``t0`` is the
    time at step 0, so that t = t0 + step_index * dt.
    """

    t: float
    u: Field
    b: Field
    v: Field
    g: Field
    shear: ShearProfile
    b_bar: float = 1.0
    step_index: int = 0
    history: Optional[Tuple[np.ndarray, np.ndarray]] = None
    t0: float = 0.0

    @property
    def grid(self) -> Grid:
        return self.u.grid

    @classmethod
    def from_fields(
        cls,
        u: Field,
        b: Field,
        shear: ShearProfile,
        b_bar: float = 1.0,
        t: Optional[float] = None,
        step_index: int = 0,
        history: Optional[Tuple[np.ndarray, np.ndarray]] = None,
        t0: Optional[float] = None,
    ) -> "PerturbationState":
        """Build a state, regenerating v and g from u and b.

        ``t0`` defaults to ``t`` for a state at step 0 and to 0 otherwise.
        """
        grid = u.grid
        if len(shear.y) != grid.ny or not np.array_equal(shear.y, grid.y):
            raise ConfigError("shear profile is not sampled on the grid's y nodes")
        v = Field(grid, recover_normal_array(grid, u.values))
        g = Field(grid, recover_normal_array(grid, b.values))
        t = shear.t if t is None else t
        if t0 is None:
            t0 = t if step_index == 0 else 0.0
        return cls(
            t=t,
            u=u,
            b=b,
            v=v,
            g=g,
            shear=shear,
            b_bar=b_bar,
            step_index=step_index,
            history=history,
            t0=t0,
        )

    def roll_x(self, shift: int) -> "PerturbationState":
        """The same state translated by ``shift`` grid points in x."""
        history = None
        if self.history is not None:
            history = tuple(np.roll(h, shift, axis=1) for h in self.history)
        return replace(
            self,
            u=self.u.roll_x(shift),
            b=self.b.roll_x(shift),
            v=self.v.roll_x(shift),
            g=self.g.roll_x(shift),
            history=history,
        )

    def boundary_defects(self) -> Dict[str, float]:
        """Wall values that must vanish: u, v, g and d_y b at y = 0."""
        grid = self.grid
        db_wall = np.asarray(grid.d1[0] @ self.b.values).ravel()
        return {
            "u_wall": float(np.max(np.abs(self.u.values[0]))),
            "v_wall": float(np.max(np.abs(self.v.values[0]))),
            "g_wall": float(np.max(np.abs(self.g.values[0]))),
            "dyb_wall": float(np.max(np.abs(db_wall))),
            "u_top": float(np.max(np.abs(self.u.values[-1]))),
            "b_top": float(np.max(np.abs(self.b.values[-1]))),
        }

    def sup(self) -> float:
        return max(self.u.sup(), self.b.sup())
