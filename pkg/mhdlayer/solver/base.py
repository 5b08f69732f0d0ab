"""Base class and factory for perturbation steppers."""

import logging
import warnings
from abc import ABC, abstractmethod
from typing import Callable, Dict, Optional, Tuple, Type

import numpy as np

from ..exceptions import BlowupDetected, CFLViolation, ConfigError, NonFiniteTendency
from ..field_core import Field, Grid
from ..shear.base import BaseShearDatum, ShearDatumFactory
from .kinematics import recover_normal_array
from .state import PerturbationState, SolverConfig

logger = logging.getLogger(__name__)


class BaseStepper(ABC):
    """One time step of the perturbation system on a fixed grid."""

    scheme = "base"

    def __init__(self, grid: Grid, cfg: SolverConfig, datum: BaseShearDatum):
        """Initialize the stepper.

        Args:
            grid: Grid shared by every state this stepper advances
            cfg: Solver configuration
            datum: Shear datum supplying the exact background at each time
        """
        self.grid = grid
        self.cfg = cfg
        self.datum = datum
        self._cfl_warned = False
        # Neumann closure at the wall: d1[0] . b = 0 solved for b[0]
        row = grid.d1.getrow(0).toarray().ravel()
        self._neumann_row = row
        self._setup()

    def _setup(self) -> None:
        """Precompute operators; subclasses override."""
        pass

    @abstractmethod
    def _advance(
        self, s: PerturbationState
    ) -> Tuple[np.ndarray, np.ndarray, Tuple[np.ndarray, np.ndarray]]:
        """Return (u_new, b_new, history) before boundary conditions are imposed."""
        pass

    def impose_boundary_conditions(self, u: np.ndarray, b: np.ndarray) -> None:
        u[0] = 0.0
        u[-1] = 0.0
        b[-1] = 0.0
        row = self._neumann_row
        b[0] = -(row[1:] @ b[1:]) / row[0]

    def check_cfl(self, s: PerturbationState) -> float:
        """Explicit stability number; warns once when it exceeds 1."""
        grid = self.grid
        k_max = float(grid.kx[-2]) if grid.nx > 2 else float(grid.kx[-1])
        h = grid.h_min
        adv = (
            np.max(np.abs(s.shear.values[:, None] + s.u.values)) * k_max
            + np.max(np.abs(s.v.values)) / h
            + np.max(np.abs(s.b_bar + s.b.values)) * k_max
            + np.max(np.abs(s.g.values)) / h
        )
        number = float(self.cfg.dt * adv)
        if self.scheme == "explicit":
            number = max(number, self.cfg.dt / (0.5 * h * h))
        if number > 1.0 and not self._cfl_warned:
            warnings.warn(
                f"{self.scheme} step with dt={self.cfg.dt:g} exceeds its explicit "
                f"stability estimate ({number:.3g} > 1)",
                CFLViolation,
                stacklevel=3,
            )
            self._cfl_warned = True
        return number

    def step(self, s: PerturbationState) -> PerturbationState:
        """Advance the state by one step of size cfg.dt.

        Raises:
            BlowupDetected: If values leave the finite range or exceed the cap
        """
        n_next = s.step_index + 1
        t_next = s.t0 + n_next * self.cfg.dt
        if self.cfg.cfl_check:
            self.check_cfl(s)
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                u_new, b_new, history = self._advance(s)
        except NonFiniteTendency as e:
            raise BlowupDetected(s.t, "nonfinite", f"non-finite tendency at t={s.t:.6g}") from e
        self.impose_boundary_conditions(u_new, b_new)

        if not (np.all(np.isfinite(u_new)) and np.all(np.isfinite(b_new))):
            raise BlowupDetected(t_next, "nonfinite")
        sup = max(float(np.max(np.abs(u_new))), float(np.max(np.abs(b_new))))
        if sup > self.cfg.blowup_threshold:
            raise BlowupDetected(
                t_next, "norm-cap", f"sup norm {sup:.3e} exceeds cap at t={t_next:.6g}"
            )

        grid = self.grid
        return PerturbationState(
            t=t_next,
            u=Field(grid, u_new),
            b=Field(grid, b_new),
            v=Field(grid, recover_normal_array(grid, u_new)),
            g=Field(grid, recover_normal_array(grid, b_new)),
            shear=self.datum.profile(t_next, grid),
            b_bar=s.b_bar,
            step_index=n_next,
            history=history,
            t0=s.t0,
        )

    def integrate(
        self,
        s: PerturbationState,
        n_steps: Optional[int] = None,
        callback: Optional[Callable[[PerturbationState], None]] = None,
    ) -> PerturbationState:
        """Step ``n_steps`` times (default: up to cfg.t_max)."""
        if n_steps is None:
            n_steps = max(0, self.cfg.n_steps - s.step_index)
        for _ in range(n_steps):
            s = self.step(s)
            if callback is not None:
                callback(s)
        return s


class StepperFactory:
    """Factory for steppers keyed by scheme name."""

    _registry: Dict[str, Type[BaseStepper]] = {}

    @classmethod
    def register(cls, stepper_cls: Type[BaseStepper]) -> Type[BaseStepper]:
        cls._registry[stepper_cls.scheme] = stepper_cls
        return stepper_cls

    @classmethod
    def create(cls, grid: Grid, cfg: SolverConfig, datum: BaseShearDatum) -> BaseStepper:
        try:
            stepper_cls = cls._registry[cfg.scheme]
        except KeyError:
            raise ConfigError(f"solver.scheme must be one of {sorted(cls._registry)}")
        logger.debug(f"Creating {cfg.scheme} stepper on {grid}")
        return stepper_cls(grid, cfg, datum)


_STEPPER_CACHE: Dict[Tuple[int, SolverConfig, str, float], BaseStepper] = {}


def step(s: PerturbationState, cfg: SolverConfig) -> PerturbationState:
    """Advance ``s`` by one step with a cached stepper for its grid and datum."""
    key = (id(s.grid), cfg, s.shear.datum, s.shear.u_bar)
    stepper = _STEPPER_CACHE.get(key)
    if stepper is None or stepper.grid is not s.grid:
        datum = ShearDatumFactory.create(s.shear.datum, s.shear.u_bar)
        stepper = StepperFactory.create(s.grid, cfg, datum)
        if len(_STEPPER_CACHE) > 16:
            _STEPPER_CACHE.clear()
        _STEPPER_CACHE[key] = stepper
    return stepper.step(s)
