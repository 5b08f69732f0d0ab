"""Smooth cutoff shear datum and its heat evolution.

chi(y) vanishes for y <= 1, equals u_bar for y >= 2 and is C-infinity in
between. The evolution uses the odd-extension heat kernel: the constant part on
[2, inf) integrates in closed form, the transition layer on [1, 2] is handled
by Gauss-Legendre quadrature.
"""

import math
from typing import Tuple, Union

import numpy as np
from scipy.special import erfc, expit

from ..exceptions import DomainError
from ..field_core import Grid
from .base import BaseShearDatum, ShearDatumFactory, ShearProfile

MIN_QUADRATURE_NODES = 64
MAX_QUADRATURE_NODES = 4096


def smooth_cutoff(y: np.ndarray, u_bar: float = 1.0) -> Tuple[np.ndarray, ...]:
    """chi and its first three derivatives on the nodes y."""
    y = np.asarray(y, dtype=np.float64)
    values = np.where(y >= 2.0, u_bar, 0.0)
    d1 = np.zeros_like(y)
    d2 = np.zeros_like(y)
    d3 = np.zeros_like(y)
    inside = (y > 1.0) & (y < 2.0)
    if np.any(inside):
        a = y[inside] - 1.0
        b = 2.0 - y[inside]
        q = 1.0 / b - 1.0 / a
        q1 = 1.0 / b**2 + 1.0 / a**2
        q2 = 2.0 / b**3 - 2.0 / a**3
        q3 = 6.0 / b**4 + 6.0 / a**4
        sig = expit(q)
        s1 = sig * expit(-q)
        s2 = s1 * (1.0 - 2.0 * sig)
        s3 = s1 * (1.0 - 6.0 * sig + 6.0 * sig**2)
        values[inside] = u_bar * sig
        d1[inside] = u_bar * s1 * q1
        d2[inside] = u_bar * (s2 * q1**2 + s1 * q2)
        d3[inside] = u_bar * (s3 * q1**3 + 3.0 * s2 * q1 * q2 + s1 * q3)
    return values, d1, d2, d3


def _kernel(s: np.ndarray, t: float, n: int) -> np.ndarray:
    """n-th derivative of the 1-D heat kernel G_t(s)."""
    g = np.exp(-(s**2) / (4.0 * t)) / math.sqrt(4.0 * math.pi * t)
    if n == 0:
        return g
    if n == 1:
        return -s / (2.0 * t) * g
    if n == 2:
        return (s**2 / (4.0 * t**2) - 1.0 / (2.0 * t)) * g
    if n == 3:
        return (3.0 * s / (4.0 * t**2) - s**3 / (8.0 * t**3)) * g
    raise ValueError(f"kernel derivative of order {n} not available")


@ShearDatumFactory.register
class CutoffDatum(BaseShearDatum):
    """Cutoff datum chi evolved by the heat equation with u(0) = 0."""

    name = "cutoff"

    def initial_values(self, y: np.ndarray) -> np.ndarray:
        return smooth_cutoff(y, self.u_bar)[0]

    def _quadrature(self, t: float) -> Tuple[np.ndarray, np.ndarray]:
        n = int(min(MAX_QUADRATURE_NODES, max(MIN_QUADRATURE_NODES, math.ceil(8.0 / math.sqrt(t)))))
        nodes, weights = np.polynomial.legendre.leggauss(n)
        # map [-1, 1] -> [1, 2]
        return 1.5 + 0.5 * nodes, 0.5 * weights

    def profile(self, t: float, y: Union[Grid, np.ndarray]) -> ShearProfile:
        if t < 0:
            raise DomainError(f"shear time must be >= 0, got {t}")
        y = y.y if isinstance(y, Grid) else np.asarray(y, dtype=np.float64)
        if t == 0:
            values, d1, d2, d3 = smooth_cutoff(y, self.u_bar)
            return ShearProfile(0.0, self.u_bar, y, values, d1, d2, d3, datum=self.name)

        root = 2.0 * math.sqrt(t)
        values = 0.5 * self.u_bar * (erfc((2.0 - y) / root) - erfc((2.0 + y) / root))
        derivs = [
            self.u_bar * (_kernel(y - 2.0, t, n - 1) + _kernel(y + 2.0, t, n - 1))
            for n in (1, 2, 3)
        ]

        z, w = self._quadrature(t)
        chi_w = smooth_cutoff(z, self.u_bar)[0] * w
        minus = y[:, None] - z[None, :]
        plus = y[:, None] + z[None, :]
        values = values + (_kernel(minus, t, 0) - _kernel(plus, t, 0)) @ chi_w
        for n in (1, 2, 3):
            derivs[n - 1] = derivs[n - 1] + (_kernel(minus, t, n) - _kernel(plus, t, n)) @ chi_w

        return ShearProfile(
            float(t), self.u_bar, y, values, derivs[0], derivs[1], derivs[2], datum=self.name
        )


def cutoff_shear(t: float, u_bar: float, y: Union[Grid, np.ndarray]) -> ShearProfile:
    """Heat evolution of the smooth cutoff datum at time t."""
    return CutoffDatum(u_bar).profile(t, y)
