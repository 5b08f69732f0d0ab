"""The analyticity radius ODE and the closed-form lifespan estimate.

    d(tau^{3/2})/dt = -(3 C0 (K+1) / 2) (<t>^{-1/4} (|u~|_X + |b~|_X) + <t>^{1/4} (|u~|_D + |b~|_D))

The update integrates the weights <t>^{-1/4} and <t>^{1/4} exactly and the
norms by the trapezoidal rule, so constant norms are integrated without error.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, List, Optional, Tuple

import numpy as np
import pandas as pd

from ..exceptions import DomainError, RadiusCollapsed
from .params import LifespanParams

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class NormTotals:
    """Summed norms of one field; stands in for a full NormBundle."""

    X_total: float
    D_total: float


def _totals(norms_u: Any, norms_b: Any) -> Tuple[float, float]:
    return (
        float(norms_u.X_total + norms_b.X_total),
        float(norms_u.D_total + norms_b.D_total),
    )


def weight_integrals(t0: float, t1: float) -> Tuple[float, float]:
    """(int <s>^{-1/4} ds, int <s>^{1/4} ds) over [t0, t1]."""
    a, b = 1.0 + t0, 1.0 + t1
    return (
        4.0 / 3.0 * (b**0.75 - a**0.75),
        4.0 / 5.0 * (b**1.25 - a**1.25),
    )


def tau_step(
    tau: float,
    norms_u: Any,
    norms_b: Any,
    dt: float,
    p: LifespanParams,
    t: float = 0.0,
    next_norms: Optional[Tuple[Any, Any]] = None,
) -> float:
    """Advance tau over [t, t + dt].

    Args:
        tau: Radius at t
        norms_u: Norm bundle (anything with X_total and D_total) of u~ at t
        norms_b: Same for b~
        dt: Step length
        p: Lifespan parameters (uses C0 and K)
        t: Start time
        next_norms: Bundles at t + dt; the norms at t are reused when omitted

    Returns:
        Radius at t + dt, never larger than ``tau``

    Raises:
        RadiusCollapsed: If tau^{3/2} reaches zero
    """
    if not tau > 0:
        raise RadiusCollapsed(f"tau={tau} at t={t:.6g}")
    x0, d0 = _totals(norms_u, norms_b)
    x1, d1 = _totals(*next_norms) if next_norms is not None else (x0, d0)
    w_x, w_d = weight_integrals(t, t + dt)
    increment = 0.5 * (x0 + x1) * w_x + 0.5 * (d0 + d1) * w_d
    power = tau**1.5 - p.ode_rate * increment
    if not power > 0:
        raise RadiusCollapsed(f"tau^(3/2) reached {power:.3e} at t={t + dt:.6g}")
    return min(tau, power ** (2.0 / 3.0))


@dataclass
class TauTrace:
    """Sampled (t, tau) pairs of one run."""

    tau_init: float
    times: List[float] = field(default_factory=list)
    values: List[float] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.times:
            self.times.append(0.0)
            self.values.append(self.tau_init)

    def append(self, t: float, tau: float) -> None:
        if tau > self.values[-1]:
            raise DomainError(f"tau increased from {self.values[-1]} to {tau} at t={t}")
        self.times.append(t)
        self.values.append(tau)

    @property
    def taus(self) -> np.ndarray:
        return np.asarray(self.values)

    @property
    def t(self) -> np.ndarray:
        return np.asarray(self.times)

    @property
    def current(self) -> float:
        return self.values[-1]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"t": self.times, "tau": self.values})

    @classmethod
    def integrate(
        cls,
        times: np.ndarray,
        X_totals: np.ndarray,
        D_totals: np.ndarray,
        p: LifespanParams,
        tau_init: Optional[float] = None,
    ) -> "TauTrace":
        """Radius trace for prescribed summed norms (u~ and b~ combined).

        Stops at the last sample before tau collapses.
        """
        zero = NormTotals(0.0, 0.0)
        trace = cls(tau_init=p.tau0 if tau_init is None else tau_init, times=[float(times[0])])
        trace.values.append(trace.tau_init)
        for i in range(1, len(times)):
            try:
                tau = tau_step(
                    trace.current,
                    NormTotals(X_totals[i - 1], D_totals[i - 1]),
                    zero,
                    float(times[i] - times[i - 1]),
                    p,
                    t=float(times[i - 1]),
                    next_norms=(NormTotals(X_totals[i], D_totals[i]), zero),
                )
            except RadiusCollapsed:
                logger.debug(f"radius collapsed after t={times[i - 1]:.6g}")
                break
            trace.append(float(times[i]), tau)
        return trace


def theoretical_lifespan(epsilon: float, C_bar: float = 1.0) -> float:
    """T = C_bar (1 / (eps ln(1/eps)^3))^(2 - 4/(ln(1/eps) + 2)) - 1.

    Raises:
        DomainError: If epsilon is outside (0, 1) or C_bar <= 0
    """
    if not 0.0 < epsilon < 1.0:
        raise DomainError(f"epsilon must lie in (0, 1), got {epsilon}")
    if not C_bar > 0:
        raise DomainError(f"C_bar must be positive, got {C_bar}")
    log_inv = math.log(1.0 / epsilon)
    exponent = 2.0 - 4.0 / (log_inv + 2.0)
    return C_bar * (1.0 / (epsilon * log_inv**3)) ** exponent - 1.0


def tau_lower_bound(p: LifespanParams, t: float) -> float:
    """Guaranteed radius at time t from the closed a-priori estimate; 0 once exhausted.

    tau(t)^{3/2} >= tau0^{3/2} - max(3, 12/delta) C C0 (K+1)^2 <t>^{1/2+eta1} eps
    """
    growth = p.C * p.C0 * (p.K + 1.0) ** 2 * (1.0 + t) ** (0.5 + p.eta1) * p.epsilon
    power = p.tau0**1.5 - max(3.0 * growth, 12.0 * growth / p.delta)
    if power <= 0:
        return 0.0
    return power ** (2.0 / 3.0)


def decay_functional(X_u: float, X_b: float, p: LifespanParams, t: float) -> float:
    """(|u~|_X + K |b~|_X) <t>^{1/4 - eta1}; bounded by a multiple of epsilon on the lifespan."""
    return (X_u + p.K * X_b) * (1.0 + t) ** (0.25 - p.eta1)
