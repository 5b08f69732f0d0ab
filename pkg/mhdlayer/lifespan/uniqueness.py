"""Difference of two discretizations of the same data, measured in the analytic norm.

Both runs start from identical data; one steps with dt, the other with dt/2.
The difference of their transformed unknowns is measured in X_{tau, alpha} with
a radius that starts from tau0/8 and follows the radius ODE of the coarse run.
"""

import logging
from dataclasses import replace
from typing import Optional

import pandas as pd

from ..analytic_norms import norm_totals
from ..cancellation import to_tilde
from ..config import InternalConfig, RunConfig
from ..exceptions import BlowupDetected, OverflowAtM, RadiusCollapsed, UnstableSample
from ..field_core import Field
from ..shear import ShearDatumFactory
from ..solver import StepperFactory
from .experiment import build_params, initial_state, transformed_norms
from .tau import tau_step

logger = logging.getLogger(__name__)


def uniqueness_diagnostic(
    cfg: RunConfig, epsilon: Optional[float] = None, b_bar: Optional[float] = None
) -> pd.DataFrame:
    """Track |u~_1 - u~_2|_X + |b~_1 - b~_2|_X for runs with dt and dt/2.

    Returns:
        Frame with columns t, tau, diff_X, diff_D, X_coarse; stops early when
        either run or the radius ends
    """
    epsilon = cfg.lifespan.epsilons[0] if epsilon is None else epsilon
    b_bar = cfg.physics.b_bar if b_bar is None else b_bar
    grid = cfg.grid.build()
    datum = ShearDatumFactory.create(cfg.physics.datum, cfg.physics.u_bar)
    coarse_cfg = cfg.solver.to_solver_config()
    fine_cfg = replace(cfg.solver, dt=cfg.solver.dt / 2).to_solver_config()
    coarse = StepperFactory.create(grid, coarse_cfg, datum)
    fine = StepperFactory.create(grid, fine_cfg, datum)

    params = build_params(cfg, epsilon)
    alpha, m_max = params.run_alpha, cfg.norms.m_max
    s_coarse = initial_state(cfg, grid, datum, epsilon, b_bar)
    s_fine = s_coarse
    tau = InternalConfig.uniqueness_tau_fraction * params.tau0
    norms = transformed_norms(s_coarse, tau, alpha, m_max)

    rows = []

    def record(t: float) -> None:
        a, b = to_tilde(s_coarse), to_tilde(s_fine)
        du = norm_totals(Field(grid, a.u_tilde.values - b.u_tilde.values), tau, alpha, t, m_max)
        db = norm_totals(Field(grid, a.b_tilde.values - b.b_tilde.values), tau, alpha, t, m_max)
        rows.append(
            {
                "t": t,
                "tau": tau,
                "diff_X": du.X_total + db.X_total,
                "diff_D": du.D_total + db.D_total,
                "X_coarse": norms[0].X_total + norms[1].X_total,
            }
        )

    record(0.0)
    for n in range(coarse_cfg.n_steps):
        try:
            nxt = coarse.step(s_coarse)
            s_fine = fine.step(fine.step(s_fine))
            new_norms = transformed_norms(nxt, tau, alpha, m_max)
            tau = tau_step(
                tau, norms[0], norms[1], coarse_cfg.dt, params, t=s_coarse.t, next_norms=new_norms
            )
        except (BlowupDetected, RadiusCollapsed, OverflowAtM, UnstableSample) as e:
            logger.info(f"Uniqueness diagnostic stopped after t={s_coarse.t:.6g}: {e}")
            break
        s_coarse, norms = nxt, new_norms
        if (n + 1) % cfg.norms.sample_every == 0:
            record(s_coarse.t)
    return pd.DataFrame(rows)
