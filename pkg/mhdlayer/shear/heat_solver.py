"""Crank-Nicolson stepping of the shear heat equation."""

import logging
from typing import List, Optional

import numpy as np
from scipy.linalg import LinAlgError, solve_banded

from ..exceptions import DomainError, SingularTridiagonal
from .base import ShearProfile

logger = logging.getLogger(__name__)


def laplacian_bands(y: np.ndarray) -> np.ndarray:
    """Three-point second-derivative operator on (possibly nonuniform) nodes.

    Returns:
        Array of shape (3, ny) in ``solve_banded`` layout; boundary rows are zero.
    """
    ny = len(y)
    h_minus = y[1:-1] - y[:-2]
    h_plus = y[2:] - y[1:-1]
    bands = np.zeros((3, ny))
    # row j couples to j-1 (lower band), j (diagonal), j+1 (upper band)
    bands[0, 2:] = 2.0 / (h_plus * (h_minus + h_plus))
    bands[1, 1:-1] = -2.0 / (h_minus * h_plus)
    bands[2, :-2] = 2.0 / (h_minus * (h_minus + h_plus))
    return bands


def _apply_bands(bands: np.ndarray, u: np.ndarray) -> np.ndarray:
    out = bands[1] * u
    out[:-1] += bands[0, 1:] * u[1:]
    out[1:] += bands[2, :-1] * u[:-1]
    return out


def _derivatives(y: np.ndarray, values: np.ndarray, bands: np.ndarray):
    dy1 = np.gradient(values, y, edge_order=2)
    dy2 = _apply_bands(bands, values)
    dy2[0] = np.gradient(dy1, y, edge_order=2)[0]
    dy2[-1] = 0.0
    dy3 = np.gradient(dy2, y, edge_order=2)
    return dy1, dy2, dy3


def step_heat(p: ShearProfile, dt: float, t_new: Optional[float] = None) -> ShearProfile:
    """Advance the shear profile by one Crank-Nicolson step.

    Dirichlet data u(0) = 0 and u(y_max) = u_bar. The scheme is unconditionally
    stable and second order in dt; it keeps the discrete maximum principle when
    dt is at most the square of the smallest node spacing.

    Args:
        p: Profile at time t
        dt: Time step
        t_new: Time stamp of the result; defaults to p.t + dt

    Returns:
        Profile at the new time with second-order numerical derivatives

    Raises:
        SingularTridiagonal: If the implicit system cannot be solved
    """
    if not dt > 0:
        raise DomainError(f"dt must be positive, got {dt}")
    y = p.y
    bands = laplacian_bands(y)

    rhs = p.values + 0.5 * dt * _apply_bands(bands, p.values)
    rhs[0] = 0.0
    rhs[-1] = p.u_bar

    ab = -0.5 * dt * bands
    ab[1] += 1.0
    # boundary rows are identity rows
    ab[1, 0] = ab[1, -1] = 1.0
    ab[0, 1] = 0.0
    ab[2, -2] = 0.0

    try:
        new_values = solve_banded((1, 1), ab, rhs, check_finite=True)
    except (LinAlgError, ValueError) as e:
        raise SingularTridiagonal(f"Crank-Nicolson system is singular: {e}") from e
    if not np.all(np.isfinite(new_values)):
        raise SingularTridiagonal("Crank-Nicolson solve produced non-finite values")

    dy1, dy2, dy3 = _derivatives(y, new_values, bands)
    return ShearProfile(
        t=p.t + dt if t_new is None else t_new,
        u_bar=p.u_bar,
        y=y,
        values=new_values,
        dy1=dy1,
        dy2=dy2,
        dy3=dy3,
        datum=p.datum,
    )


def evolve_heat(p: ShearProfile, dt: float, n_steps: int) -> ShearProfile:
    """Apply ``step_heat`` n_steps times; time is accumulated as t0 + n dt."""
    t0 = p.t
    current = p
    for n in range(1, n_steps + 1):
        current = step_heat(current, dt, t_new=t0 + n * dt)
    return current


def heat_trace(p: ShearProfile, dt: float, n_steps: int, every: int = 1) -> List[ShearProfile]:
    """Sequence of stepped profiles, one every ``every`` steps."""
    trace = [p]
    current = p
    t0 = p.t
    for n in range(1, n_steps + 1):
        current = step_heat(current, dt, t_new=t0 + n * dt)
        if n % every == 0:
            trace.append(current)
    logger.debug(f"Heat trace: {len(trace)} profiles up to t={current.t:.4g}")
    return trace
