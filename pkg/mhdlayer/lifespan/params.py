"""Parameter schedule tied to the perturbation size epsilon."""

import logging
import math
from dataclasses import asdict, dataclass
from typing import Any, Dict

from ..exceptions import DomainError

logger = logging.getLogger(__name__)

# runs with epsilon = 0 still need a finite schedule
EPSILON_FLOOR = 1e-8
ALPHA_RANGE = (0.25, 0.5)


@dataclass(frozen=True)
class LifespanParams:
    """Constants of the radius ODE and the lifespan estimate.

    With delta = 1 / ln(1/epsilon):
    alpha = 1/2 - delta, beta1 = beta2 = delta/2, K = 4C/delta, eta1 = delta,
    eta2 = delta/8. ``run_alpha`` is the weight exponent actually used for
    norms; it equals alpha when alpha lies in [1/4, 1/2] and is clipped
    otherwise.
    """

    epsilon: float
    tau0: float
    C: float
    delta: float
    alpha: float
    beta1: float
    beta2: float
    K: float
    eta1: float
    eta2: float
    C0: float = 1.0
    C_bar: float = 1.0
    lam: float = 1.5
    strict: bool = True

    @classmethod
    def from_epsilon(
        cls,
        epsilon: float,
        C: float = 1.0,
        tau0: float = 0.25,
        C0: float = 1.0,
        C_bar: float = 1.0,
        lam: float = 1.5,
        strict: bool = True,
    ) -> "LifespanParams":
        """Build the schedule for one epsilon.

        Args:
            epsilon: Perturbation size
            C: Shear constant (C_H)
            tau0: Initial radius scale
            C0: Constant of the radius ODE
            C_bar: Constant of the lifespan formula
            lam: Target lifespan exponent, in [3/2, 2)
            strict: Enforce epsilon in (0, e^-2) and K > 1. Non-strict mode
                accepts any epsilon in [0, 1) for numerical runs.

        Raises:
            DomainError: If a constant is out of range
        """
        if not (C > 0 and tau0 > 0 and C0 > 0 and C_bar > 0):
            raise DomainError("C, tau0, C0 and C_bar must all be positive")
        if not 1.5 <= lam < 2.0:
            raise DomainError(f"lam must lie in [3/2, 2), got {lam}")

        if strict:
            if not 0.0 < epsilon < math.exp(-2.0):
                raise DomainError(f"epsilon must lie in (0, e^-2), got {epsilon}")
            schedule_eps = epsilon
        else:
            if not 0.0 <= epsilon < 1.0:
                raise DomainError(f"epsilon must lie in [0, 1), got {epsilon}")
            schedule_eps = max(epsilon, EPSILON_FLOOR)

        delta = 1.0 / math.log(1.0 / schedule_eps)
        params = cls(
            epsilon=epsilon,
            tau0=tau0,
            C=C,
            delta=delta,
            alpha=0.5 - delta,
            beta1=delta / 2.0,
            beta2=delta / 2.0,
            K=4.0 * C / delta,
            eta1=delta,
            eta2=delta / 8.0,
            C0=C0,
            C_bar=C_bar,
            lam=lam,
            strict=strict,
        )
        if strict and not params.K > 1.0:
            raise DomainError(f"K = 4C/delta must exceed 1, got {params.K}")
        if not strict and params.run_alpha != params.alpha:
            logger.warning(
                f"epsilon={epsilon:g} is outside the asymptotic range; "
                f"alpha={params.alpha:.4f} clipped to {params.run_alpha:.4f} for norms"
            )
        return params

    @property
    def run_alpha(self) -> float:
        return min(max(self.alpha, ALPHA_RANGE[0]), ALPHA_RANGE[1])

    @property
    def ode_rate(self) -> float:
        """3 C0 (K + 1) / 2, the prefactor of the radius ODE."""
        return 1.5 * self.C0 * (self.K + 1.0)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["run_alpha"] = self.run_alpha
        return data
