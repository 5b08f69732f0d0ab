"""Normal components from the divergence-free constraints."""

import numpy as np

from ..field_core import Field, Grid, cumint_array, ddx_array


def recover_normal_array(grid: Grid, values: np.ndarray) -> np.ndarray:
    return -cumint_array(grid, ddx_array(grid, values))


def recover_normal(f: Field) -> Field:
    """v = -int_0^y d_x u (or g from b); vanishes at the wall."""
    return Field(f.grid, recover_normal_array(f.grid, f.values))


def divergence_residual(f: Field, normal: Field) -> float:
    """Largest cell-flux defect of d_x f + d_y normal = 0.

    This is the discrete flux-form constraint that ``recover_normal`` uses to
    build the normal: across each y cell the jump of the normal component must
    cancel the cell integral of d_x f. It is zero to round-off by construction.
    A pointwise d_y of the normal would also pick up the quadrature error.
    """
    grid = f.grid
    jumps = np.diff(normal.values, axis=0)
    fluxes = np.asarray(grid.cell_weights @ ddx_array(grid, f.values))
    scale = max(1.0, float(np.max(np.abs(normal.values))))
    return float(np.max(np.abs(jumps + fluxes))) / scale
