"""Right-hand sides of the perturbation system and of its transformed form.

Perturbation system around (u_s, 0, b_bar, 0), kappa = 1:

    d_t u = -(u_s+u) d_x u - v d_y(u_s+u) + (b_bar+b) d_x b + g d_y b + d_y^2 u
    d_t b = (b_bar+b) d_x u + g d_y(u_s+u) - (u_s+u) d_x b - v d_y b + d_y^2 b

with v = -int_0^y d_x u and g = -int_0^y d_x b.
"""

import logging
from typing import TYPE_CHECKING, Tuple

import numpy as np

from ..exceptions import NonFiniteTendency
from ..field_core import Field, Grid, cumint_array, ddx_array, ddy_array
from ..shear.base import ShearProfile
from .state import PerturbationState

if TYPE_CHECKING:
    from ..cancellation import TransformedState

logger = logging.getLogger(__name__)


def _checked(*arrays: np.ndarray) -> None:
    for arr in arrays:
        if not np.all(np.isfinite(arr)):
            raise NonFiniteTendency("tendency contains non-finite values")


def explicit_terms(
    grid: Grid, u: np.ndarray, b: np.ndarray, shear: ShearProfile, b_bar: float
) -> Tuple[np.ndarray, np.ndarray]:
    """Transport, stretching and coupling terms (everything except d_y^2)."""
    us = shear.values[:, None]
    us1 = shear.dy1[:, None]
    ux = ddx_array(grid, u)
    bx = ddx_array(grid, b)
    uy = ddy_array(grid, u)
    by = ddy_array(grid, b)
    v = -cumint_array(grid, ux)
    g = -cumint_array(grid, bx)
    nu = -(us + u) * ux - v * (us1 + uy) + (b_bar + b) * bx + g * by
    nb = (b_bar + b) * ux + g * (us1 + uy) - (us + u) * bx - v * by
    return nu, nb


def rhs_primitive(s: PerturbationState) -> Tuple[Field, Field]:
    """Pointwise tendencies (d_t u, d_t b) of the perturbation system.

    Raises:
        NonFiniteTendency: If any tendency is NaN or infinite
    """
    grid = s.grid
    u, b = s.u.values, s.b.values
    with np.errstate(over="ignore", invalid="ignore"):
        nu, nb = explicit_terms(grid, u, b, s.shear, s.b_bar)
        du = nu + ddy_array(grid, u, 2)
        db = nb + ddy_array(grid, b, 2)
    _checked(du, db)
    return Field(grid, du), Field(grid, db)


def rhs_linearized(s: PerturbationState) -> Tuple[Field, Field]:
    """Tendencies with every quadratic perturbation term dropped."""
    grid = s.grid
    u, b = s.u.values, s.b.values
    us = s.shear.values[:, None]
    us1 = s.shear.dy1[:, None]
    ux = ddx_array(grid, u)
    bx = ddx_array(grid, b)
    v = -cumint_array(grid, ux)
    g = -cumint_array(grid, bx)
    du = -us * ux - v * us1 + s.b_bar * bx + ddy_array(grid, u, 2)
    db = s.b_bar * ux + g * us1 - us * bx + ddy_array(grid, b, 2)
    _checked(du, db)
    return Field(grid, du), Field(grid, db)


def rhs_transformed(ts: "TransformedState") -> Tuple[Field, Field]:
    """Tendencies of the transformed unknowns (u~, b~).

    u~ = u - d_y u_s psi and b~ = b with psi = int_0^y b. For general b_bar:

        d_t u~ = d_y^2 u~ - (u_s+u) d_x u~ - v d_y u~ + (b_bar+b) d_x b~ + g d_y b~
                 + 2 u_s'' b~ - v u_s'' psi + (b_bar-1) u_s' v
        d_t b~ = d_y^2 b~ + (b_bar+b) d_x u~ + g d_y u~ - (u_s+u) d_x b~ - v d_y b~
                 + g u_s'' psi + (1-b_bar) u_s' g

    The last terms of each line vanish for b_bar = 1. Only used to cross-check
    the primitive solver, never for production stepping.
    """
    from ..cancellation import from_tilde

    grid = ts.grid
    prim = from_tilde(ts)
    u, v, g = prim.u.values, prim.v.values, prim.g.values
    ut, bt = ts.u_tilde.values, ts.b_tilde.values
    psi = ts.psi.values
    b_bar = ts.b_bar
    us = ts.shear.values[:, None]
    us1 = ts.shear.dy1[:, None]
    us2 = ts.shear.dy2[:, None]

    with np.errstate(over="ignore", invalid="ignore"):
        utx = ddx_array(grid, ut)
        btx = ddx_array(grid, bt)
        uty = ddy_array(grid, ut)
        bty = ddy_array(grid, bt)
        du = (
            ddy_array(grid, ut, 2)
            - (us + u) * utx
            - v * uty
            + (b_bar + bt) * btx
            + g * bty
            + 2.0 * us2 * bt
            - v * us2 * psi
            + (b_bar - 1.0) * us1 * v
        )
        db = (
            ddy_array(grid, bt, 2)
            + (b_bar + bt) * utx
            + g * uty
            - (us + u) * btx
            - v * bty
            + g * us2 * psi
            + (1.0 - b_bar) * us1 * g
        )
    _checked(du, db)
    return Field(grid, du), Field(grid, db)


def chain_rule_tendency(s: PerturbationState) -> Tuple[Field, Field]:
    """Transformed tendencies assembled from the primitive ones.

    d_t u~ = d_t u - d_t(d_y u_s) psi - d_y u_s int_0^y d_t b, where
    d_t(d_y u_s) = d_y^3 u_s because u_s solves the heat equation.
    """
    grid = s.grid
    du, db = rhs_primitive(s)
    psi = cumint_array(grid, s.b.values)
    dut = (
        du.values
        - s.shear.dy3[:, None] * psi
        - s.shear.dy1[:, None] * cumint_array(grid, db.values)
    )
    return Field(grid, dut), db
