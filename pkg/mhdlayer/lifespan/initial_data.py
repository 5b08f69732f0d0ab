"""Seeded initial perturbations with a prescribed analytic norm."""

import logging
import math
from typing import Tuple

import numpy as np

from ..analytic_norms import norm_totals
from ..exceptions import ConfigError
from ..field_core import Field, Grid

logger = logging.getLogger(__name__)

CALIBRATION_ALPHA = 0.5


def tangential_profile(grid: Grid, n_modes: int, rho: float, seed: int) -> np.ndarray:
    """phi(x) = sum_k rho^k cos(k x + phase_k) with seeded phases."""
    if not 1 <= n_modes < grid.nx // 2:
        raise ConfigError(f"lifespan.n_modes must lie in [1, nx/2), got {n_modes}")
    rng = np.random.default_rng(seed)
    phases = rng.uniform(0.0, 2.0 * math.pi, size=n_modes)
    phi = np.zeros(grid.nx)
    for k in range(1, n_modes + 1):
        phi += rho**k * np.cos(grid.kx[k] * grid.x + phases[k - 1])
    return phi


def calibrated_initial_data(
    grid: Grid,
    eps: float,
    tau0: float,
    seed: int = 0,
    n_modes: int = 4,
    rho: float = 0.5,
    m_max: int = 16,
) -> Tuple[Field, Field]:
    """u0 = a phi(x) y e^{-y^2/2}, b0 = c phi(x) e^{-y^2/2} with |u0|_X = |b0|_X = eps.

    Norms are measured in X_{2 tau0, 1/2} at t = 0. u0 vanishes at the wall and
    b0 has zero wall derivative, matching the boundary conditions.
    """
    if eps == 0:
        return Field.zeros(grid), Field.zeros(grid)
    phi = tangential_profile(grid, n_modes, rho, seed)
    envelope = np.exp(-0.5 * grid.y**2)
    u_shape = Field(grid, np.outer(grid.y * envelope, phi))
    b_shape = Field(grid, np.outer(envelope, phi))

    scaled = []
    for name, shape in (("u", u_shape), ("b", b_shape)):
        bundle = norm_totals(shape, 2.0 * tau0, CALIBRATION_ALPHA, 0.0, m_max)
        if bundle is None or not bundle.X_total > 0:
            raise ConfigError(f"cannot calibrate {name}0: reference norm vanishes")
        scaled.append(shape * (eps / bundle.X_total))
    logger.debug(f"Calibrated initial data: eps={eps:g}, tau0={tau0:g}, seed={seed}")
    return scaled[0], scaled[1]
