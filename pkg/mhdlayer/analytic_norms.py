"""Gaussian-weighted analytic norms.

For a field f, radius tau, weight theta_alpha and M_m = sqrt(m + 1) / m!:

    X_m = tau^m M_m ||theta d_x^m f||          (summed: ||f||_X)
    D_m = tau^m M_m ||theta d_y d_x^m f||      (summed: ||f||_D)
    Z_m = tau^m M_m ||theta z d_x^m f||        z = y / sqrt(<t>)
    Y_m = (m / tau) X_m                        (summed over m >= 1: ||f||_Y)

Sums over m are l1 sums. The x-derivatives are evaluated mode by mode through
Parseval's identity and combined in log space so that tau^m k^m M_m never
overflows before it is multiplied by a decaying Fourier coefficient.
"""

import logging
import math
import warnings
from dataclasses import asdict, dataclass
from typing import Any, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.special import gammaln, logsumexp

from .exceptions import (
    DomainError,
    OverflowAtM,
    TruncationWarning,
    UnstableSample,
    ZeroDenominator,
)
from .field_core import Field, GaussianWeight, ddy_array, weighted_product

logger = logging.getLogger(__name__)

DEFAULT_M_MAX = 16
TAIL_TOLERANCE = 1e-10
DENOMINATOR_FLOOR = 1e-300
LOG_FLOAT_MAX = math.log(np.finfo(np.float64).max)


def log_mm_coeff(m: int) -> float:
    return 0.5 * math.log(m + 1) - float(gammaln(m + 1))


def mm_coeff(m: int) -> float:
    """M_m = sqrt(m + 1) / m!, through log space for m > 20."""
    if m < 0:
        raise DomainError(f"m must be >= 0, got {m}")
    if m <= 20:
        return math.sqrt(m + 1) / math.factorial(m)
    return math.exp(log_mm_coeff(m))


@dataclass
class NormBundle:
    """Per-m semi-norms of one field at one (tau, alpha, t)."""

    m_max: int
    X: np.ndarray
    D: np.ndarray
    Z: np.ndarray
    Y: np.ndarray
    tau: float
    alpha: float
    t: float

    @property
    def X_total(self) -> float:
        return float(np.sum(self.X))

    @property
    def D_total(self) -> float:
        return float(np.sum(self.D))

    @property
    def Z_total(self) -> float:
        return float(np.sum(self.Z))

    @property
    def Y_total(self) -> float:
        return float(np.sum(self.Y[1:]))

    def is_finite(self) -> bool:
        return bool(
            np.all(np.isfinite(self.X))
            and np.all(np.isfinite(self.D))
            and np.all(np.isfinite(self.Y))
        )

    def raw_norms(self) -> np.ndarray:
        """||theta d_x^m f|| without the tau^m M_m factor."""
        scale = np.exp(
            np.arange(self.m_max + 1) * math.log(self.tau)
            + np.array([log_mm_coeff(m) for m in range(self.m_max + 1)])
        )
        return self.X / scale

    def to_frame(self) -> pd.DataFrame:
        rows: List[dict] = [
            {
                "t": self.t,
                "tau": self.tau,
                "alpha": self.alpha,
                "m": m,
                "X_m": self.X[m],
                "D_m": self.D[m],
                "Z_m": self.Z[m],
                "Y_m": self.Y[m],
            }
            for m in range(self.m_max + 1)
        ]
        rows.append(
            {
                "t": self.t,
                "tau": self.tau,
                "alpha": self.alpha,
                "m": "total",
                "X_m": self.X_total,
                "D_m": self.D_total,
                "Z_m": self.Z_total,
                "Y_m": self.Y_total,
            }
        )
        return pd.DataFrame(rows)


def _mode_energies(f: Field, prod: np.ndarray) -> np.ndarray:
    """sum_y w_y |FFT_x(prod)|^2 per rfft mode, scaled so the sum is the L2 norm squared."""
    grid = f.grid
    modes = np.fft.rfft(prod, axis=1)
    energy = grid.y_weights @ (modes.real**2 + modes.imag**2)
    multiplicity = np.full(energy.shape, 2.0)
    multiplicity[0] = 1.0
    multiplicity[-1] = 1.0
    return energy * multiplicity * grid.L_x / grid.nx**2


def _log_derivative_norms(f: Field, energy: np.ndarray, m_max: int) -> np.ndarray:
    """log ||d_x^m g|| for m = 0..m_max from the mode energies of g."""
    out = np.full(m_max + 1, -np.inf)
    total = float(np.sum(energy))
    if total > 0:
        out[0] = 0.5 * math.log(total)
    # the Nyquist mode is dropped for every m >= 1
    k = f.grid.kx[1:-1]
    e = energy[1:-1]
    mask = e > 0
    if not np.any(mask):
        return out
    log_k = np.log(k[mask])
    log_e = np.log(e[mask])
    for m in range(1, m_max + 1):
        out[m] = 0.5 * float(logsumexp(2.0 * m * log_k + log_e))
    return out


def _scaled(log_norms: np.ndarray, tau: float) -> np.ndarray:
    values = np.zeros_like(log_norms)
    for m, log_norm in enumerate(log_norms):
        if log_norm == -np.inf:
            continue
        log_value = log_norm + m * math.log(tau) + log_mm_coeff(m)
        if log_value > LOG_FLOAT_MAX:
            raise OverflowAtM(m)
        values[m] = math.exp(log_value)
    return values


def _energies(f: Field, alpha: float, t: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    weight = GaussianWeight(alpha, t)
    grid = f.grid
    e_x = _mode_energies(f, weighted_product(grid, f.values, weight))
    e_d = _mode_energies(f, weighted_product(grid, ddy_array(grid, f.values), weight))
    e_z = _mode_energies(f, weighted_product(grid, f.values, weight, extra=weight.z(grid.y)))
    return e_x, e_d, e_z


def seminorms(
    f: Field, tau: float, alpha: float, t: float, m_max: int = DEFAULT_M_MAX
) -> NormBundle:
    """All four semi-norm families of f for m = 0..m_max.

    Raises:
        DomainError: If tau <= 0
        OverflowAtM: If a term exceeds the float range even after log-space
            evaluation
    """
    if not tau > 0:
        raise DomainError(f"tau must be positive, got {tau}")
    e_x, e_d, e_z = _energies(f, alpha, t)
    X = _scaled(_log_derivative_norms(f, e_x, m_max), tau)
    D = _scaled(_log_derivative_norms(f, e_d, m_max), tau)
    Z = _scaled(_log_derivative_norms(f, e_z, m_max), tau)
    m = np.arange(m_max + 1)
    Y = (m / tau) * X

    bundle = NormBundle(m_max=m_max, X=X, D=D, Z=Z, Y=Y, tau=tau, alpha=alpha, t=t)
    total = bundle.X_total
    if total > 0 and X[-1] > TAIL_TOLERANCE * total:
        warnings.warn(
            f"semi-norm tail X_{m_max}/||f||_X = {X[-1] / total:.2e} exceeds "
            f"{TAIL_TOLERANCE:g}; raise m_max or lower tau",
            TruncationWarning,
            stacklevel=2,
        )
    return bundle


def poincare_check(
    f: Field, alpha: float, t: float, m: int, strict: bool = False
) -> float:
    """||theta d_y d_x^m f||^2 / ((alpha/<t>) ||theta d_x^m f||^2).

    A value >= 1 certifies the Gaussian Poincare inequality on this sample.
    f = 0 returns +inf (the inequality reads 0 <= 0) unless ``strict``.

    Raises:
        ZeroDenominator: In strict mode when ||theta d_x^m f|| vanishes
    """
    e_x, e_d, _ = _energies(f, alpha, t)
    log_num = _log_derivative_norms(f, e_d, m)[m]
    log_den = _log_derivative_norms(f, e_x, m)[m]
    if log_den == -np.inf:
        if strict:
            raise ZeroDenominator(f"||theta d_x^{m} f|| vanishes")
        return math.inf
    return math.exp(2.0 * (log_num - log_den)) * (1.0 + t) / alpha


def dissipation_sum(bundle: NormBundle) -> float:
    """sum_m tau^m M_m ||theta d_y d_x^m f||^2 / ||theta d_x^m f|| = sum_m D_m^2 / X_m."""
    keep = bundle.raw_norms() >= DENOMINATOR_FLOOR
    if not np.any(keep):
        return 0.0
    return float(np.sum(bundle.D[keep] ** 2 / bundle.X[keep]))


def summed_poincare_rhs(bundle: NormBundle, alpha: float, t: float, beta: float) -> float:
    bracket = 1.0 + t
    return (
        math.sqrt(alpha) * beta / (2.0 * math.sqrt(bracket)) * bundle.D_total
        + alpha * (1.0 - beta) / bracket * bundle.X_total
    )


def lemma22_check(
    f: Field, tau: float, alpha: float, t: float, beta: float, m_max: int = DEFAULT_M_MAX
) -> Tuple[float, float]:
    """Both sides of the summed Gaussian Poincare estimate.

    lhs = sum_m D_m^2 / X_m
    rhs = (alpha^(1/2) beta / (2 <t>^(1/2))) ||f||_D + (alpha (1 - beta) / <t>) ||f||_X

    Raises:
        DomainError: If beta is outside (0, 1/2)
    """
    if not 0.0 < beta < 0.5:
        raise DomainError(f"beta must lie in (0, 1/2), got {beta}")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        bundle = seminorms(f, tau, alpha, t, m_max)
    return dissipation_sum(bundle), summed_poincare_rhs(bundle, alpha, t, beta)


@dataclass
class MonitorSample:
    """Every quantity of the a-priori inequalities at one trajectory sample."""

    t: float
    tau: float
    tau_dot: float
    X_u: float
    X_b: float
    D_u: float
    D_b: float
    Y_u: float
    Y_b: float
    dX_u_dt: float
    dX_b_dt: float
    dissipation_u: float
    dissipation_b: float
    linear_u: float
    linear_b: float
    nonlinear: float
    summed_rhs_u: float
    summed_rhs_b: float
    C0_sample: float
    C0_hat: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)


def _as_taus(tau_trace: Any, n: int) -> np.ndarray:
    taus = np.asarray(getattr(tau_trace, "taus", tau_trace), dtype=np.float64)
    if taus.shape != (n,):
        raise DomainError(f"tau trace has {taus.size} samples, trajectory has {n}")
    return taus


def apriori_monitor(
    traj: Sequence[Any],
    tau_trace: Any,
    alpha: float,
    C: float = 1.0,
    beta: float = 0.25,
    m_max: int = DEFAULT_M_MAX,
) -> List[MonitorSample]:
    """Evaluate the a-priori energy inequalities of (u~, b~) along a run.

    For each sample the smallest constant making both inequalities hold,

        dX/dt + dissipation - linear - tau_dot Y <= C0 * nonlinear,

    is recorded; ``C0_hat`` is its maximum over the run. This is a diagnostic
    estimate of the generic constant, not a proof.

    Args:
        traj: TransformedState samples ordered in time
        tau_trace: Radii at the same samples (sequence or object with ``taus``)
        alpha: Gaussian weight exponent
        C: Shear constant of the linear b~ term
        beta: Splitting parameter for the reported lower bounds
        m_max: Highest tangential derivative

    Raises:
        UnstableSample: If norms are non-finite at some sample
    """
    n = len(traj)
    if n == 0:
        return []
    taus = _as_taus(tau_trace, n)
    times = np.array([ts.t for ts in traj], dtype=np.float64)

    bundles_u, bundles_b = [], []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        for ts, tau in zip(traj, taus):
            try:
                bu = seminorms(ts.u_tilde, float(tau), alpha, ts.t, m_max)
                bb = seminorms(ts.b_tilde, float(tau), alpha, ts.t, m_max)
            except (OverflowAtM, ArithmeticError) as e:
                raise UnstableSample(ts.t) from e
            if not (bu.is_finite() and bb.is_finite()):
                raise UnstableSample(ts.t)
            bundles_u.append(bu)
            bundles_b.append(bb)

    X_u = np.array([b.X_total for b in bundles_u])
    X_b = np.array([b.X_total for b in bundles_b])
    if n > 1:
        dX_u = np.gradient(X_u, times)
        dX_b = np.gradient(X_b, times)
        tau_dot = np.gradient(taus, times)
    else:
        dX_u = dX_b = tau_dot = np.zeros(1)

    samples = []
    for i in range(n):
        bu, bb = bundles_u[i], bundles_b[i]
        bracket = 1.0 + times[i]
        dissipation_u = dissipation_sum(bu)
        dissipation_b = dissipation_sum(bb)
        linear_u = alpha / (2.0 * bracket) * bu.X_total + C / bracket * bb.X_total
        linear_b = alpha / (2.0 * bracket) * bb.X_total
        nonlinear = (
            taus[i] ** -0.5
            * (
                bracket**-0.25 * (bu.X_total + bb.X_total)
                + bracket**0.25 * (bu.D_total + bb.D_total)
            )
            * (bu.Y_total + bb.Y_total)
        )
        excess_u = dX_u[i] + dissipation_u - linear_u - tau_dot[i] * bu.Y_total
        excess_b = dX_b[i] + dissipation_b - linear_b - tau_dot[i] * bb.Y_total
        worst = max(excess_u, excess_b)
        if worst <= 0.0:
            c0 = 0.0
        elif nonlinear > 0.0:
            c0 = worst / nonlinear
        else:
            c0 = math.inf
        samples.append(
            MonitorSample(
                t=float(times[i]),
                tau=float(taus[i]),
                tau_dot=float(tau_dot[i]),
                X_u=bu.X_total,
                X_b=bb.X_total,
                D_u=bu.D_total,
                D_b=bb.D_total,
                Y_u=bu.Y_total,
                Y_b=bb.Y_total,
                dX_u_dt=float(dX_u[i]),
                dX_b_dt=float(dX_b[i]),
                dissipation_u=dissipation_u,
                dissipation_b=dissipation_b,
                linear_u=linear_u,
                linear_b=linear_b,
                nonlinear=float(nonlinear),
                summed_rhs_u=summed_poincare_rhs(bu, alpha, times[i], beta),
                summed_rhs_b=summed_poincare_rhs(bb, alpha, times[i], beta),
                C0_sample=float(c0),
            )
        )

    c0_hat = max(sample.C0_sample for sample in samples)
    for sample in samples:
        sample.C0_hat = c0_hat
    logger.info(f"A-priori monitor over {n} samples: C0_hat={c0_hat:.4g}")
    return samples


def monitor_frame(samples: Sequence[MonitorSample]) -> pd.DataFrame:
    return pd.DataFrame([s.to_dict() for s in samples])


def norm_totals(
    f: Field, tau: float, alpha: float, t: float, m_max: int = DEFAULT_M_MAX
) -> Optional[NormBundle]:
    """``seminorms`` with truncation warnings silenced; None for non-finite fields."""
    if not np.all(np.isfinite(f.values)):
        return None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        return seminorms(f, tau, alpha, t, m_max)
