"""A single lifespan run: solver steps, transformed norms and the radius ODE in lockstep."""

import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from ..analytic_norms import NormBundle, apriori_monitor, norm_totals
from ..cancellation import TransformedState, to_tilde
from ..config import InternalConfig, RunConfig, config_hash
from ..exceptions import (
    BlowupDetected,
    CheckpointError,
    OverflowAtM,
    RadiusCollapsed,
    UnstableSample,
)
from ..field_core import Grid
from ..result import ExperimentRecord
from ..shear import BaseShearDatum, ShearDatumFactory
from ..solver import (
    BaseStepper,
    PerturbationState,
    StepperFactory,
    load_checkpoint,
    save_checkpoint,
)
from .initial_data import calibrated_initial_data
from .params import LifespanParams
from .tau import NormTotals, decay_functional, tau_lower_bound, tau_step

logger = logging.getLogger(__name__)

TRACE_COLUMNS = ["t", "tau", "X_u", "X_b", "D_u", "D_b", "decay", "tau_lower_bound", "sup"]


def cell_name(epsilon: float, b_bar: float) -> str:
    return f"eps_{epsilon:.6g}_bbar_{b_bar:.6g}"


def transformed_norms(
    state: PerturbationState, tau: float, alpha: float, m_max: int
) -> Tuple[NormBundle, NormBundle]:
    """Norm bundles of (u~, b~) for one state.

    Raises:
        UnstableSample: If either bundle is not finite
    """
    ts = to_tilde(state)
    norms_u = norm_totals(ts.u_tilde, tau, alpha, state.t, m_max)
    norms_b = norm_totals(ts.b_tilde, tau, alpha, state.t, m_max)
    if norms_u is None or norms_b is None or not (norms_u.is_finite() and norms_b.is_finite()):
        raise UnstableSample(state.t)
    return norms_u, norms_b


def _trace_row(
    state: PerturbationState, tau: float, norms: Tuple[Any, Any], params: LifespanParams
) -> List[float]:
    nu, nb = norms
    return [
        state.t,
        tau,
        nu.X_total,
        nb.X_total,
        nu.D_total,
        nb.D_total,
        decay_functional(nu.X_total, nb.X_total, params, state.t),
        tau_lower_bound(params, state.t),
        state.sup(),
    ]


def build_params(cfg: RunConfig, epsilon: float, C0: Optional[float] = None) -> LifespanParams:
    block = cfg.lifespan
    return LifespanParams.from_epsilon(
        epsilon,
        C=block.C,
        tau0=cfg.norms.tau0,
        C0=block.C0 if C0 is None else C0,
        C_bar=block.C_bar,
        lam=block.lam,
        strict=False,
    )


def initial_state(
    cfg: RunConfig, grid: Grid, datum: BaseShearDatum, epsilon: float, b_bar: float
) -> PerturbationState:
    u0, b0 = calibrated_initial_data(
        grid,
        epsilon,
        cfg.norms.tau0,
        seed=cfg.io.seed,
        n_modes=cfg.lifespan.n_modes,
        rho=cfg.lifespan.rho,
        m_max=cfg.norms.m_max,
    )
    return PerturbationState.from_fields(u0, b0, datum.profile(0.0, grid), b_bar=b_bar, t=0.0)


def calibrate_C0(
    cfg: RunConfig, stepper: BaseStepper, state: PerturbationState, params: LifespanParams
) -> float:
    """Estimate C0 with the a-priori monitor on a short run at fixed radius tau0.

    Falls back to the configured C0 when the estimate is zero or unusable.
    """
    traj: List[TransformedState] = [to_tilde(state)]
    for n in range(cfg.lifespan.calibration_steps):
        try:
            state = stepper.step(state)
        except BlowupDetected:
            break
        if (n + 1) % cfg.norms.sample_every == 0:
            traj.append(to_tilde(state))
    if len(traj) < 2:
        logger.warning("C0 calibration produced fewer than 2 samples; using configured C0")
        return cfg.lifespan.C0
    try:
        samples = apriori_monitor(
            traj, [params.tau0] * len(traj), params.run_alpha, C=params.C, m_max=cfg.norms.m_max
        )
    except UnstableSample as e:
        logger.warning(f"C0 calibration unstable at t={e.t:.4g}; using configured C0")
        return cfg.lifespan.C0
    estimate = samples[-1].C0_hat
    if not (math.isfinite(estimate) and estimate > 0):
        logger.warning(f"C0 estimate {estimate} unusable; using configured C0")
        return cfg.lifespan.C0
    logger.info(f"Calibrated C0={estimate:.4g} from {len(traj)} samples")
    return estimate


def _checkpoint(
    directory: Path,
    state: PerturbationState,
    dt: float,
    tau: float,
    norms: Tuple[Any, Any],
    rows: List[List[float]],
    memory: Dict[str, Any],
) -> Path:
    path = directory / f"step_{state.step_index:08d}.npz"
    extra = dict(memory, tau=tau, trace_columns=TRACE_COLUMNS)
    arrays = {
        "norms_u": np.array([norms[0].X_total, norms[0].D_total]),
        "norms_b": np.array([norms[1].X_total, norms[1].D_total]),
        "trace": np.asarray(rows, dtype=np.float64).reshape(-1, len(TRACE_COLUMNS)),
    }
    return save_checkpoint(path, state, dt, extra=extra, arrays=arrays)


def run_experiment(
    cfg: RunConfig,
    epsilon: Optional[float] = None,
    b_bar: Optional[float] = None,
    out_dir: Optional[Union[str, Path]] = None,
    restart: Optional[Union[str, Path]] = None,
) -> ExperimentRecord:
    """Run one (epsilon, b_bar) cell until its first end condition.

    End conditions, in the order they are checked after every step:
    ``nonfinite`` / ``norm-cap`` from the solver, ``radius-floor`` once
    tau < tau0/4, ``norm-cap`` once |u~|_X + |b~|_X exceeds
    ``lifespan.norm_cap_factor`` times its initial value, and ``horizon`` at
    ``solver.t_max``.

    Args:
        cfg: Run configuration
        epsilon: Perturbation size (default: first configured epsilon)
        b_bar: Tangential magnetic field (default: physics.b_bar)
        out_dir: Directory for trace, record and checkpoints; nothing is
            written when None
        restart: Checkpoint to resume from

    Returns:
        ExperimentRecord with the sampled trace attached
    """
    epsilon = cfg.lifespan.epsilons[0] if epsilon is None else epsilon
    b_bar = cfg.physics.b_bar if b_bar is None else b_bar
    grid = cfg.grid.build()
    datum = ShearDatumFactory.create(cfg.physics.datum, cfg.physics.u_bar)
    solver_cfg = cfg.solver.to_solver_config()
    stepper = StepperFactory.create(grid, solver_cfg, datum)
    dt = solver_cfg.dt
    m_max = cfg.norms.m_max
    out_path = Path(out_dir) if out_dir is not None else None
    checkpoint_dir = out_path / InternalConfig.checkpoint_dir if out_path is not None else None

    if restart is not None:
        state, meta, extras = load_checkpoint(restart, grid)
        memory = meta["extra"]
        if memory.get("epsilon") != epsilon or memory.get("b_bar") != b_bar:
            raise CheckpointError(f"checkpoint {restart} belongs to another cell")
        params = build_params(cfg, epsilon, C0=memory["C0"])
        tau = float(memory["tau"])
        cap_reference = float(memory["cap_reference"])
        norms: Tuple[Any, Any] = (
            NormTotals(*map(float, extras["norms_u"])),
            NormTotals(*map(float, extras["norms_b"])),
        )
        rows = [list(map(float, row)) for row in extras["trace"]]
        logger.info(f"Resuming {cell_name(epsilon, b_bar)} from step {state.step_index}")
    else:
        state = initial_state(cfg, grid, datum, epsilon, b_bar)
        params = build_params(cfg, epsilon)
        if cfg.lifespan.C0_source == "monitor" and epsilon > 0:
            probe = StepperFactory.create(grid, solver_cfg, datum)
            params = build_params(cfg, epsilon, C0=calibrate_C0(cfg, probe, state, params))
        tau = params.tau0
        norms = transformed_norms(state, tau, params.run_alpha, m_max)
        cap_reference = norms[0].X_total + norms[1].X_total
        rows = [_trace_row(state, tau, norms, params)]

    memory = {
        "epsilon": epsilon,
        "b_bar": b_bar,
        "C0": params.C0,
        "cap_reference": cap_reference,
        "seed": cfg.io.seed,
    }
    floor = InternalConfig.radius_floor_fraction * params.tau0
    cap = cfg.lifespan.norm_cap_factor * cap_reference
    logger.info(
        f"Run {cell_name(epsilon, b_bar)}: alpha={params.run_alpha:.4f}, K={params.K:.4g}, "
        f"C0={params.C0:.4g}, {solver_cfg.n_steps} steps of dt={dt:g}"
    )

    end_reason = "horizon"
    T_end: Optional[float] = None
    sampled_at = state.step_index if state.step_index % cfg.norms.sample_every == 0 else -1
    while state.step_index < solver_cfg.n_steps:
        try:
            new_state = stepper.step(state)
            new_norms = transformed_norms(new_state, tau, params.run_alpha, m_max)
            new_tau = tau_step(tau, norms[0], norms[1], dt, params, t=state.t, next_norms=new_norms)
        except BlowupDetected as e:
            end_reason, T_end = e.reason, e.t
            logger.info(f"Solver stopped at t={e.t:.6g}: {e}")
            break
        except (OverflowAtM, UnstableSample) as e:
            end_reason, T_end = "nonfinite", state.t + dt
            logger.info(f"Norms unusable after t={state.t:.6g}: {e}")
            break
        except RadiusCollapsed:
            end_reason, T_end = "radius-floor", state.t + dt
            break

        state, norms, tau = new_state, new_norms, new_tau
        total = norms[0].X_total + norms[1].X_total
        if tau < floor:
            end_reason = "radius-floor"
            break
        if cap_reference > 0 and total > cap:
            end_reason = "norm-cap"
            break

        if state.step_index % cfg.norms.sample_every == 0:
            rows.append(_trace_row(state, tau, norms, params))
            sampled_at = state.step_index
        if (
            checkpoint_dir is not None
            and cfg.io.checkpoint_every
            and state.step_index % cfg.io.checkpoint_every == 0
        ):
            _checkpoint(checkpoint_dir, state, dt, tau, norms, rows, memory)

    if sampled_at != state.step_index:
        rows.append(_trace_row(state, tau, norms, params))
    if T_end is None:
        T_end = state.t

    trace = pd.DataFrame(rows, columns=TRACE_COLUMNS)
    record = ExperimentRecord(
        epsilon=epsilon,
        b_bar=b_bar,
        T_end=float(T_end),
        end_reason=end_reason,
        tau_final=float(tau),
        params=params.to_dict(),
        seed=cfg.io.seed,
        config_hash=config_hash(cfg),
        grid=grid.metadata(),
        steps=state.step_index,
        trace=trace,
    )
    if out_path is not None:
        _write_outputs(record, out_path, cfg.io.save_traces)
    logger.info(
        f"Run {cell_name(epsilon, b_bar)} ended: {end_reason} at T={record.T_end:.6g}, "
        f"tau={record.tau_final:.4g}"
    )
    return record


def _write_outputs(record: ExperimentRecord, out_path: Path, save_traces: bool) -> None:
    out_path.mkdir(parents=True, exist_ok=True)
    if save_traces:
        trace_path = out_path / InternalConfig.trace_name
        trace_path.write_text(record.extract_csv(), encoding="utf-8")
        record.paths["trace"] = str(trace_path)
    record_path = out_path / InternalConfig.record_name
    record.paths["record"] = str(record_path)
    record_path.write_text(record.to_json(), encoding="utf-8")
