"""Error-function shear datum, solved exactly."""

import math
from typing import Union

import numpy as np
from scipy.special import erf

from ..exceptions import DomainError
from ..field_core import Grid
from .base import BaseShearDatum, ShearDatumFactory, ShearProfile


def _nodes(y: Union[Grid, np.ndarray]) -> np.ndarray:
    return y.y if isinstance(y, Grid) else np.asarray(y, dtype=np.float64)


@ShearDatumFactory.register
class ErfDatum(BaseShearDatum):
    """u_s0(y) = u_bar * erf(y / 2); at time t the profile is erf(y / (2 sqrt(1 + t)))."""

    name = "erf"

    def initial_values(self, y: np.ndarray) -> np.ndarray:
        return self.u_bar * erf(np.asarray(y) / 2.0)

    def profile(self, t: float, y: Union[Grid, np.ndarray]) -> ShearProfile:
        if t < 0:
            raise DomainError(f"shear time must be >= 0, got {t}")
        y = _nodes(y)
        s = 1.0 + t
        values = self.u_bar * erf(y / (2.0 * math.sqrt(s)))
        dy1 = self.u_bar / math.sqrt(math.pi * s) * np.exp(-(y**2) / (4.0 * s))
        dy2 = -(y / (2.0 * s)) * dy1
        dy3 = (y**2 / (4.0 * s**2) - 1.0 / (2.0 * s)) * dy1
        return ShearProfile(
            t=float(t), u_bar=self.u_bar, y=y, values=values, dy1=dy1, dy2=dy2, dy3=dy3,
            datum=self.name,
        )


def erf_shear(t: float, u_bar: float, y: Union[Grid, np.ndarray]) -> ShearProfile:
    """Closed-form shear profile u_bar * erf(y / (2 sqrt(1 + t))) on the nodes y."""
    return ErfDatum(u_bar).profile(t, y)
