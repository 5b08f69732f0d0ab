"""The magnetic cancellation transform.

With the magnetic stream function psi = int_0^y b, the substitution

    u~ = u - d_y u_s * psi,    b~ = b

removes the v d_y u_s term that makes the classical boundary-layer system lose
derivatives. The inverse is u = u~ + d_y u_s * int_0^y b~. psi is always
recomputed from b~ so the pair (u~, psi) cannot drift apart.
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Optional

import numpy as np

from .field_core import Field, Grid, cumint_array, cumint_y, ddy_array
from .shear.base import ShearProfile
from .solver.state import PerturbationState

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TransformedState:
    """(u~, b~) at time t together with the shear profile they were built on."""

    t: float
    u_tilde: Field
    b_tilde: Field
    shear: ShearProfile
    b_bar: float = 1.0

    @property
    def grid(self) -> Grid:
        return self.u_tilde.grid

    @cached_property
    def psi(self) -> Field:
        return compute_psi(self.b_tilde)

    def boundary_defects(self) -> Dict[str, float]:
        grid = self.grid
        db_wall = np.asarray(grid.d1[0] @ self.b_tilde.values).ravel()
        return {
            "u_tilde_wall": float(np.max(np.abs(self.u_tilde.values[0]))),
            "dyb_tilde_wall": float(np.max(np.abs(db_wall))),
            "psi_wall": float(np.max(np.abs(self.psi.values[0]))),
        }


def compute_psi(b: Field) -> Field:
    """Magnetic stream function psi = int_0^y b."""
    return cumint_y(b)


def to_tilde(s: PerturbationState) -> TransformedState:
    """Apply the cancellation transform; b~ is the very same Field as b."""
    psi = compute_psi(s.b)
    u_tilde = Field(s.grid, s.u.values - s.shear.dy1[:, None] * psi.values)
    return TransformedState(t=s.t, u_tilde=u_tilde, b_tilde=s.b, shear=s.shear, b_bar=s.b_bar)


def from_tilde(ts: TransformedState) -> PerturbationState:
    """Invert the transform and regenerate v and g."""
    u = Field(ts.grid, ts.u_tilde.values + ts.shear.dy1[:, None] * ts.psi.values)
    return PerturbationState.from_fields(u, ts.b_tilde, ts.shear, b_bar=ts.b_bar, t=ts.t)


def _psi_source(s: PerturbationState) -> np.ndarray:
    """v (b_bar + b) - (u_s + u) g, the non-diffusive part of the psi equation."""
    us = s.shear.values[:, None]
    return s.v.values * (s.b_bar + s.b.values) - (us + s.u.values) * s.g.values


def psi_residual(
    s_before: PerturbationState,
    s_after: PerturbationState,
    dt: float,
    forcing: Optional[Field] = None,
) -> Field:
    """Discrete residual of d_t psi + v (b_bar + b) - (u_s + u) g = d_y^2 psi.

    The time derivative is the centered difference over [t, t + dt]; every
    other term is averaged over the two snapshots, so a consistent trajectory
    leaves a residual of size O(dt^2) + O(h^4).

    Args:
        s_before: State at time t
        s_after: State at time t + dt
        dt: Separation of the snapshots
        forcing: Midpoint forcing for manufactured solutions

    Returns:
        Residual field
    """
    grid = s_before.grid
    psi0 = cumint_array(grid, s_before.b.values)
    psi1 = cumint_array(grid, s_after.b.values)
    residual = (
        (psi1 - psi0) / dt
        + 0.5 * (_psi_source(s_before) + _psi_source(s_after))
        - 0.5 * (ddy_array(grid, psi0, 2) + ddy_array(grid, psi1, 2))
    )
    if forcing is not None:
        residual = residual - forcing.values
    return Field(grid, residual)


@dataclass
class NormComparison:
    """Both directions of the norm equivalence between (u, b) and (u~, b~)."""

    u: float
    u_tilde: float
    b: float
    C: float

    @property
    def primitive_bound(self) -> float:
        return self.u_tilde + self.C * self.b

    @property
    def transformed_bound(self) -> float:
        return self.u + self.C * self.b

    @property
    def holds(self) -> bool:
        return self.u <= self.primitive_bound and self.u_tilde <= self.transformed_bound

    def to_dict(self) -> Dict[str, float]:
        return {
            "u": self.u,
            "u_tilde": self.u_tilde,
            "b": self.b,
            "C": self.C,
            "primitive_bound": self.primitive_bound,
            "transformed_bound": self.transformed_bound,
            "holds": self.holds,
        }


def norm_comparison(
    s: PerturbationState, tau: float, alpha: float, C: float, m_max: int = 16
) -> NormComparison:
    """Evaluate ||u||_X <= ||u~||_X + C ||b~||_X and its converse on one state."""
    from .analytic_norms import seminorms

    ts = to_tilde(s)
    result = NormComparison(
        u=seminorms(s.u, tau, alpha, s.t, m_max).X_total,
        u_tilde=seminorms(ts.u_tilde, tau, alpha, s.t, m_max).X_total,
        b=seminorms(s.b, tau, alpha, s.t, m_max).X_total,
        C=C,
    )
    logger.debug(f"Norm comparison at t={s.t:.4g}: {result.to_dict()}")
    return result
