"""Numerical check of the shear decay hypothesis.

For the background profile we expect

    sup |d_y u_s|            ~ <t>^(-1/2)
    sup |d_y^2 u_s|          ~ <t>^(-1)
    ||theta_a d_y^2 u_s||_L2 ~ <t>^(-3/4)
    int |d_y u_s| dy         <= C

and report the largest measured ratio as the generic constant C_H.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np
import pandas as pd

from ..exceptions import InsufficientSamples
from ..field_core import GaussianWeight, quadrature_weights, theta_times
from .base import BaseShearDatum, ShearProfile

logger = logging.getLogger(__name__)

MIN_SAMPLES = 20
MIN_SPAN = 10.0

EXPECTED_SLOPES = {"sup_dy1": -0.5, "sup_dy2": -1.0, "weighted_dy2": -0.75}


@dataclass
class HReport:
    """Fitted decay exponents and empirical constants for a shear trace."""

    p1: float
    p2: float
    p3: float
    l1_bound: float
    C_H: float
    constants: Dict[str, float]
    window: Tuple[float, float]
    alpha: float
    samples: pd.DataFrame = field(repr=False)

    def slopes(self) -> Dict[str, float]:
        return {"sup_dy1": self.p1, "sup_dy2": self.p2, "weighted_dy2": self.p3}

    def to_frame(self) -> pd.DataFrame:
        return self.samples.copy()

    def summary(self) -> Dict[str, object]:
        return {
            "slopes": self.slopes(),
            "expected_slopes": dict(EXPECTED_SLOPES),
            "l1_bound": self.l1_bound,
            "C_H": self.C_H,
            "constants": dict(self.constants),
            "window": list(self.window),
            "alpha": self.alpha,
            "n_samples": int(len(self.samples)),
        }


def profile_quantities(p: ShearProfile, alpha: float) -> Dict[str, float]:
    weights = quadrature_weights(p.y)
    weighted = theta_times(p.y, p.dy2, GaussianWeight(alpha, p.t))
    return {
        "t": p.t,
        "sup_dy1": float(np.max(np.abs(p.dy1))),
        "sup_dy2": float(np.max(np.abs(p.dy2))),
        "l1_dy1": float(np.sum(weights * np.abs(p.dy1))),
        "weighted_dy2": math.sqrt(float(np.sum(weights * weighted**2))),
    }


def verify_H(trace: Sequence[ShearProfile], alpha: float = 0.5) -> HReport:
    """Fit the decay exponents of a shear trace.

    Args:
        trace: Profiles ordered in time over [t0, t1]
        alpha: Gaussian weight exponent for the weighted second derivative

    Returns:
        HReport with slopes against log <t> and max ratios

    Raises:
        InsufficientSamples: If the window is too short or too sparse
    """
    if len(trace) < MIN_SAMPLES:
        raise InsufficientSamples(f"need at least {MIN_SAMPLES} profiles, got {len(trace)}")
    times = np.array([p.t for p in trace], dtype=np.float64)
    t0, t1 = float(times.min()), float(times.max())
    if t0 < 1.0:
        raise InsufficientSamples(f"window must start at t0 >= 1, got {t0}")
    if t1 < MIN_SPAN * t0:
        raise InsufficientSamples(f"window [{t0}, {t1}] spans less than a factor {MIN_SPAN}")

    frame = pd.DataFrame([profile_quantities(p, alpha) for p in trace])
    log_bt = np.log1p(frame["t"].to_numpy())
    slopes = {
        name: float(np.polyfit(log_bt, np.log(frame[name].to_numpy()), 1)[0])
        for name in EXPECTED_SLOPES
    }

    bracket = 1.0 + frame["t"].to_numpy()
    constants = {
        "sup_dy1": float(np.max(frame["sup_dy1"].to_numpy() * bracket**0.5)),
        "sup_dy2": float(np.max(frame["sup_dy2"].to_numpy() * bracket)),
        "weighted_dy2": float(np.max(frame["weighted_dy2"].to_numpy() * bracket**0.75)),
        "l1_dy1": float(frame["l1_dy1"].max()),
    }
    report = HReport(
        p1=slopes["sup_dy1"],
        p2=slopes["sup_dy2"],
        p3=slopes["weighted_dy2"],
        l1_bound=constants["l1_dy1"],
        C_H=max(constants.values()),
        constants=constants,
        window=(t0, t1),
        alpha=alpha,
        samples=frame,
    )
    logger.info(
        f"(H) over [{t0:g}, {t1:g}]: slopes {report.p1:.4f}, {report.p2:.4f}, "
        f"{report.p3:.4f}; C_H={report.C_H:.4f}"
    )
    return report


def verification_nodes(t0: float, t1: float, resolution: float = 0.05) -> np.ndarray:
    """Uniform nodes wide enough for the whole window [t0, t1].

    Spacing is ``resolution`` times the diffusion length at t0; the domain
    reaches 15 diffusion lengths at t1.
    """
    y_max = 15.0 * math.sqrt(1.0 + t1)
    h = resolution * math.sqrt(1.0 + t0)
    n = int(math.ceil(y_max / h)) + 1
    return np.linspace(0.0, y_max, n)


def shear_trace(
    datum: BaseShearDatum, t0: float, t1: float, n_samples: int, y: np.ndarray
) -> List[ShearProfile]:
    """Profiles of the exact evolution at log-spaced times in [t0, t1]."""
    times = np.geomspace(t0, t1, n_samples)
    return [datum.profile(float(t), y) for t in times]
