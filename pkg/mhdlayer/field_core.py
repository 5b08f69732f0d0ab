"""Grids, scalar fields and the discrete calculus every other module builds on.

x is periodic on [0, L_x) and differentiated spectrally; y lives on [0, y_max]
and uses fourth-order finite differences with one-sided closures at both ends.
Field values are stored row = y, column = x.
"""

import json
import logging
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Any, Callable, Dict, Mapping, Optional, Tuple, Union

import numpy as np
from scipy import sparse

from .exceptions import DomainError, FieldError, GridError, NonFiniteWeightProduct

logger = logging.getLogger(__name__)

ArrayLike = Union[np.ndarray, float]

STENCIL_WIDTH = 5


def fornberg_weights(z: float, nodes: np.ndarray, order: int) -> np.ndarray:
    """Finite-difference weights on arbitrary nodes.

    Args:
        z: Point where the derivatives are approximated
        nodes: Stencil nodes
        order: Highest derivative order required

    Returns:
        Array of shape (len(nodes), order + 1); column k holds the weights of
        the k-th derivative.
    """
    n = len(nodes)
    c = np.zeros((n, order + 1))
    c1 = 1.0
    c4 = nodes[0] - z
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, order)
        c2 = 1.0
        c5 = c4
        c4 = nodes[i] - z
        for j in range(i):
            c3 = nodes[i] - nodes[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c


def _derivative_matrix(y: np.ndarray, order: int) -> sparse.csr_matrix:
    ny = len(y)
    rows, cols, data = [], [], []
    for j in range(ny):
        if order == 2 and j in (0, ny - 1):
            # boundary rows of the second derivative need six nodes for 4th order
            start = 0 if j == 0 else ny - 6
            idx = np.arange(start, start + 6)
        else:
            start = min(max(j - 2, 0), ny - STENCIL_WIDTH)
            idx = np.arange(start, start + STENCIL_WIDTH)
        w = fornberg_weights(y[j], y[idx], order)[:, order]
        rows.extend([j] * len(idx))
        cols.extend(idx.tolist())
        data.extend(w.tolist())
    return sparse.csr_matrix((data, (rows, cols)), shape=(ny, ny))


def _cell_weight_matrix(y: np.ndarray) -> sparse.csr_matrix:
    """Per-cell quadrature of the cubic interpolant through four nearby nodes."""
    ny = len(y)
    if ny < 4:
        raise GridError("at least four y nodes are needed for cell quadrature")
    powers = np.arange(4)
    # moments of s^p over [-1/2, 1/2]
    moments = np.where(powers % 2 == 0, 2.0 * 0.5 ** (powers + 1) / (powers + 1), 0.0)
    rows, cols, data = [], [], []
    for j in range(ny - 1):
        start = min(max(j - 1, 0), ny - 4)
        idx = np.arange(start, start + 4)
        h = y[j + 1] - y[j]
        mid = 0.5 * (y[j] + y[j + 1])
        s = (y[idx] - mid) / h
        vander = np.vander(s, 4, increasing=True).T
        w = np.linalg.solve(vander, moments) * h
        rows.extend([j] * 4)
        cols.extend(idx.tolist())
        data.extend(w.tolist())
    return sparse.csr_matrix((data, (rows, cols)), shape=(ny - 1, ny))


def quadrature_weights(y: np.ndarray) -> np.ndarray:
    """Quadrature weights on the nodes y, consistent with ``cumint_y``."""
    y = np.asarray(y, dtype=np.float64)
    return np.asarray(_cell_weight_matrix(y).sum(axis=0)).ravel()


def stretched_nodes(ny: int, y_max: float, stretch: float = 0.0) -> np.ndarray:
    """Nodes on [0, y_max]; ``stretch`` > 0 clusters them near the wall."""
    xi = np.linspace(0.0, 1.0, ny)
    if stretch == 0.0:
        y = y_max * xi
    else:
        y = y_max * np.sinh(stretch * xi) / math.sinh(stretch)
    y[0] = 0.0
    y[-1] = y_max
    return y


class Grid:
    """Discretization of the strip [0, L_x) x [0, y_max]."""

    def __init__(
        self,
        nx: int,
        ny: int,
        L_x: float = 2.0 * math.pi,
        y_max: float = 15.0,
        stretch: float = 0.0,
        stencil_scale: float = 1.0,
    ):
        """Initialize the grid.

        Args:
            nx: Number of periodic x samples (even, at least 4)
            ny: Number of y nodes (at least 8)
            L_x: Period of the x domain
            y_max: Truncation of the half line
            stretch: sinh stretching parameter, 0 for uniform nodes
            stencil_scale: Multiplier on the y-derivative operators; 1.0 except
                when deliberately breaking the operators in verification runs
        """
        if int(nx) != nx or nx < 4 or nx % 2:
            raise GridError(f"grid.nx must be an even integer >= 4, got {nx}")
        if int(ny) != ny or ny < 8:
            raise GridError(f"grid.ny must be an integer >= 8, got {ny}")
        if not (y_max > 0 and math.isfinite(y_max)):
            raise GridError(f"grid.y_max must be positive, got {y_max}")
        if not L_x > 0:
            raise GridError(f"grid.L_x must be positive, got {L_x}")
        if stretch < 0:
            raise GridError(f"grid.stretch must be >= 0, got {stretch}")
        if not (stencil_scale > 0 and math.isfinite(stencil_scale)):
            raise GridError(f"grid.stencil_scale must be finite and positive, got {stencil_scale}")

        self.nx = int(nx)
        self.ny = int(ny)
        self.L_x = float(L_x)
        self.y_max = float(y_max)
        self.stretch = float(stretch)
        self.stencil_scale = float(stencil_scale)

        self.x = np.arange(self.nx) * (self.L_x / self.nx)
        self.y = stretched_nodes(self.ny, self.y_max, self.stretch)
        if np.any(np.diff(self.y) <= 0):
            raise GridError("grid.y nodes must be strictly increasing")
        self.kx = 2.0 * math.pi * np.fft.rfftfreq(self.nx, d=self.L_x / self.nx)

        if self.stencil_scale != 1.0:
            logger.warning(f"Grid built with stencil_scale={self.stencil_scale}")

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.ny, self.nx)

    @property
    def dx(self) -> float:
        return self.L_x / self.nx

    @property
    def h_min(self) -> float:
        return float(np.min(np.diff(self.y)))

    @cached_property
    def d1(self) -> sparse.csr_matrix:
        return _derivative_matrix(self.y, 1) * self.stencil_scale

    @cached_property
    def d2(self) -> sparse.csr_matrix:
        return _derivative_matrix(self.y, 2) * self.stencil_scale

    @cached_property
    def cell_weights(self) -> sparse.csr_matrix:
        return _cell_weight_matrix(self.y)

    @cached_property
    def y_weights(self) -> np.ndarray:
        return np.asarray(self.cell_weights.sum(axis=0)).ravel()

    def metadata(self) -> Dict[str, Any]:
        return {
            "nx": self.nx,
            "ny": self.ny,
            "L_x": self.L_x,
            "y_max": self.y_max,
            "stretch": self.stretch,
            "stencil_scale": self.stencil_scale,
        }

    def matches(self, other: "Grid") -> bool:
        return self.metadata() == other.metadata()

    def __repr__(self) -> str:
        return (
            f"Grid(nx={self.nx}, ny={self.ny}, L_x={self.L_x:.6g}, "
            f"y_max={self.y_max:.6g}, stretch={self.stretch:.6g})"
        )


class Field:
    """Immutable scalar samples on a grid."""

    def __init__(self, grid: Grid, values: ArrayLike, check_finite: bool = True):
        try:
            arr = np.array(np.broadcast_to(values, grid.shape), dtype=np.float64)
        except ValueError as e:
            raise FieldError(f"samples do not fit grid shape {grid.shape}: {e}") from e
        if check_finite and not np.all(np.isfinite(arr)):
            raise FieldError("field samples must be finite")
        arr.flags.writeable = False
        self.grid = grid
        self.values = arr

    @classmethod
    def zeros(cls, grid: Grid) -> "Field":
        return cls(grid, np.zeros(grid.shape))

    @classmethod
    def from_function(
        cls, grid: Grid, fn: Callable[[np.ndarray, np.ndarray], ArrayLike]
    ) -> "Field":
        """Sample ``fn(X, Y)`` on the grid with X, Y of shape (ny, nx)."""
        X, Y = np.meshgrid(grid.x, grid.y)
        return cls(grid, fn(X, Y))

    def _other(self, other: Any) -> ArrayLike:
        if isinstance(other, Field):
            if other.grid is not self.grid and not other.grid.matches(self.grid):
                raise FieldError("fields live on different grids")
            return other.values
        return other

    def __add__(self, other: Any) -> "Field":
        return Field(self.grid, self.values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other: Any) -> "Field":
        return Field(self.grid, self.values - self._other(other))

    def __rsub__(self, other: Any) -> "Field":
        return Field(self.grid, self._other(other) - self.values)

    def __mul__(self, other: Any) -> "Field":
        return Field(self.grid, self.values * self._other(other))

    __rmul__ = __mul__

    def __truediv__(self, other: float) -> "Field":
        return Field(self.grid, self.values / other)

    def __neg__(self) -> "Field":
        return Field(self.grid, -self.values)

    def sup(self) -> float:
        return float(np.max(np.abs(self.values)))

    def roll_x(self, shift: int) -> "Field":
        """Shift by ``shift`` grid points in x."""
        return Field(self.grid, np.roll(self.values, shift, axis=1))

    def __repr__(self) -> str:
        return f"Field(shape={self.values.shape}, sup={self.sup():.3e})"


@dataclass(frozen=True)
class GaussianWeight:
    """theta_alpha(t, y) = exp(alpha y^2 / (4 (1 + t)))."""

    alpha: float
    t: float = 0.0

    def __post_init__(self) -> None:
        if not 0.25 - 1e-12 <= self.alpha <= 0.5 + 1e-12:
            raise DomainError(f"alpha must lie in [1/4, 1/2], got {self.alpha}")
        if self.t < 0:
            raise DomainError(f"t must be >= 0, got {self.t}")

    def log_values(self, y: np.ndarray) -> np.ndarray:
        return self.alpha * np.asarray(y) ** 2 / (4.0 * (1.0 + self.t))

    def values(self, y: np.ndarray) -> np.ndarray:
        return np.exp(self.log_values(y))

    def z(self, y: np.ndarray) -> np.ndarray:
        """Self-similar variable y / sqrt(1 + t)."""
        return np.asarray(y) / math.sqrt(1.0 + self.t)


# Array-level kernels. The solver calls these directly to avoid wrapping every
# intermediate in a Field.


def ddx_array(grid: Grid, values: np.ndarray, order: int = 1) -> np.ndarray:
    if order == 0:
        return np.array(values, dtype=np.float64)
    modes = np.fft.rfft(values, axis=1)
    modes = modes * (1j * grid.kx) ** order
    modes[:, -1] = 0.0
    return np.fft.irfft(modes, n=grid.nx, axis=1)


def ddy_array(grid: Grid, values: np.ndarray, order: int = 1) -> np.ndarray:
    if order == 1:
        return np.asarray(grid.d1 @ values)
    if order == 2:
        return np.asarray(grid.d2 @ values)
    raise ValueError(f"ddy supports order 1 or 2, got {order}")


def cumint_array(grid: Grid, values: np.ndarray) -> np.ndarray:
    increments = np.asarray(grid.cell_weights @ values)
    out = np.zeros(np.shape(values), dtype=np.float64)
    out[1:] = np.cumsum(increments, axis=0)
    return out


def theta_times(
    y: np.ndarray, values: np.ndarray, weight: GaussianWeight, extra: Optional[np.ndarray] = None
) -> np.ndarray:
    """theta * values formed pointwise along axis 0 (the y axis).

    ``extra`` is an optional y-profile multiplied in as well (the z weight).

    Raises:
        NonFiniteWeightProduct: If any product is not finite
    """
    values = np.asarray(values, dtype=np.float64)
    expand = (slice(None),) + (None,) * (values.ndim - 1)
    log_theta = weight.log_values(y)
    if extra is not None:
        with np.errstate(divide="ignore"):
            log_theta = log_theta + np.log(np.abs(extra))
    if np.max(log_theta) < 700.0:
        factor = np.exp(log_theta)
        if extra is not None:
            factor = factor * np.sign(extra)
        prod = values * factor[expand]
    else:
        # theta alone overflows; combine in log space where the samples are nonzero
        prod = np.zeros(values.shape)
        nz = values != 0
        lt = np.broadcast_to(log_theta[expand], values.shape)
        with np.errstate(over="ignore"):
            prod[nz] = np.sign(values[nz]) * np.exp(lt[nz] + np.log(np.abs(values[nz])))
        if extra is not None:
            prod = prod * np.sign(extra)[expand]
    if not np.all(np.isfinite(prod)):
        raise NonFiniteWeightProduct(
            f"theta_alpha * f is not finite (alpha={weight.alpha}, t={weight.t}, "
            f"y_max={float(y[-1]):.6g}); the field does not decay fast enough"
        )
    return prod


def weighted_product(
    grid: Grid, values: np.ndarray, weight: GaussianWeight, extra: Optional[np.ndarray] = None
) -> np.ndarray:
    return theta_times(grid.y, values, weight, extra)


# Public operations on Fields


def ddx(f: Field, order: int = 1) -> Field:
    """Spectral x-derivative of order ``order``."""
    return Field(f.grid, ddx_array(f.grid, f.values, order))


def ddy(f: Field, order: int = 1) -> Field:
    """Fourth-order finite-difference y-derivative (order 1 or 2)."""
    return Field(f.grid, ddy_array(f.grid, f.values, order))


def cumint_y(f: Field) -> Field:
    """Cumulative integral from the wall: F(x, 0) = 0, dF/dy = f."""
    return Field(f.grid, cumint_array(f.grid, f.values))


def weighted_l2(f: Field, w: GaussianWeight) -> float:
    """L2 norm of theta_alpha * f over the truncated strip."""
    grid = f.grid
    prod = weighted_product(grid, f.values, w)
    with np.errstate(over="ignore"):
        total = np.sum(grid.y_weights[:, None] * prod**2) * grid.dx
    if not math.isfinite(total):
        raise NonFiniteWeightProduct("weighted L2 sum overflowed")
    return math.sqrt(total)


def save_snapshot(
    path: Union[str, Path],
    grid: Grid,
    fields: Mapping[str, Union[Field, np.ndarray]],
    metadata: Optional[Dict[str, Any]] = None,
) -> Path:
    """Write named fields and grid metadata to an ``.npz`` container."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload: Dict[str, Any] = {
        "grid_json": np.array(json.dumps(grid.metadata())),
        "y_nodes": grid.y,
        "metadata_json": np.array(json.dumps(metadata or {}, sort_keys=True)),
    }
    for name, item in fields.items():
        payload[f"field__{name}"] = item.values if isinstance(item, Field) else np.asarray(item)
    with open(path, "wb") as fh:
        np.savez(fh, **payload)
    logger.debug(f"Snapshot written: {path}")
    return path


def load_snapshot(path: Union[str, Path]) -> Tuple[Grid, Dict[str, np.ndarray], Dict[str, Any]]:
    """Read a snapshot written by ``save_snapshot``.

    Returns:
        (grid, arrays by name, metadata)
    """
    with np.load(Path(path), allow_pickle=False) as data:
        grid = Grid(**json.loads(str(data["grid_json"])))
        if not np.array_equal(grid.y, data["y_nodes"]):
            raise GridError(f"y nodes stored in {path} do not match the rebuilt grid")
        arrays = {
            key[len("field__"):]: np.array(data[key])
            for key in data.files
            if key.startswith("field__")
        }
        metadata = json.loads(str(data["metadata_json"]))
    return grid, arrays, metadata
