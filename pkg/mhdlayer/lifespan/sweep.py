"""Epsilon x b_bar sweeps, lifespan scaling fits and the stabilization table."""

import logging
import math
from concurrent.futures import ProcessPoolExecutor, as_completed
from itertools import product
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from tqdm import tqdm

from ..config import RunConfig, config_hash
from ..exceptions import DegenerateFit
from ..result import ExperimentRecord, LifespanFit, SweepResult
from .experiment import cell_name, run_experiment
from .tau import theoretical_lifespan

logger = logging.getLogger(__name__)


def _run_cell(
    cfg_dict: Dict[str, Any], epsilon: float, b_bar: float, out_dir: Optional[str]
) -> ExperimentRecord:
    """Worker entry point; failures become ``failed`` records instead of exceptions."""
    cfg = RunConfig.from_dict(cfg_dict)
    cell_dir = Path(out_dir) / cell_name(epsilon, b_bar) if out_dir is not None else None
    try:
        return run_experiment(cfg, epsilon=epsilon, b_bar=b_bar, out_dir=cell_dir)
    except Exception as e:
        logger.warning(f"Cell {cell_name(epsilon, b_bar)} failed: {e}")
        return ExperimentRecord(
            epsilon=epsilon,
            b_bar=b_bar,
            T_end=math.nan,
            end_reason="failed",
            tau_final=math.nan,
            seed=cfg.io.seed,
            config_hash=config_hash(cfg),
            error=f"{type(e).__name__}: {e}",
        )


def synthetic_records(
    eps_list: Sequence[float], b_bar_list: Sequence[float], exponent: float, C_bar: float = 1.0
) -> List[ExperimentRecord]:
    """Fake records with T_end = C_bar * eps^(-exponent), for checking the fit path."""
    records = []
    for b_bar, eps in product(b_bar_list, eps_list):
        if eps <= 0:
            T_end, reason = math.inf, "horizon"
        else:
            T_end, reason = C_bar * eps ** (-exponent), "synthetic"
        records.append(
            ExperimentRecord(
                epsilon=eps, b_bar=b_bar, T_end=T_end, end_reason=reason, tau_final=math.nan
            )
        )
    return records


def fit_lifespan_exponent(
    records: Sequence[ExperimentRecord], b_bar: Optional[float] = None
) -> LifespanFit:
    """Least-squares fit of log T_end against log(1/eps).

    Horizon-censored and failed cells are excluded and counted.

    Args:
        records: Sweep cells
        b_bar: Restrict to one magnetic field strength; all records when None

    Raises:
        DegenerateFit: If fewer than 2 finite lifespans remain
    """
    selected = [r for r in records if b_bar is None or r.b_bar == b_bar]
    usable = [r for r in selected if r.usable and r.epsilon > 0]
    n_censored = sum(r.censored for r in selected)
    n_failed = sum(r.end_reason == "failed" for r in selected)
    if len({r.epsilon for r in usable}) < 2:
        raise DegenerateFit(
            f"{len(usable)} finite lifespans for b_bar={b_bar} "
            f"({n_censored} censored, {n_failed} failed)"
        )
    x = np.log(1.0 / np.array([r.epsilon for r in usable]))
    y = np.log(np.array([r.T_end for r in usable]))
    slope, intercept = np.polyfit(x, y, 1)
    residuals = y - (slope * x + intercept)
    if n_censored:
        logger.warning(f"Fit for b_bar={b_bar} excludes {n_censored} censored cells")
    return LifespanFit(
        b_bar=float(b_bar) if b_bar is not None else math.nan,
        lam_fit=float(slope),
        intercept=float(intercept),
        residuals=[float(r) for r in residuals],
        n_used=len(usable),
        n_censored=n_censored,
        n_failed=n_failed,
    )


def stabilization_table(records: Sequence[ExperimentRecord]) -> pd.DataFrame:
    """T_end per epsilon (rows) and b_bar (columns).

    When b_bar = 0 cells are present, a ``stabilized_<b>`` column reports
    T_end(b) >= T_end(0) for every other b on the same data.
    """
    frame = pd.DataFrame([r.summary_row() for r in records])
    if frame.empty:
        return frame
    table = frame.pivot_table(index="epsilon", columns="b_bar", values="T_end", aggfunc="first")
    table = table.sort_index(ascending=False)
    if 0.0 in table.columns:
        for b in table.columns:
            if b == 0.0:
                continue
            table[f"stabilized_{b:g}"] = table[b] >= table[0.0]
    table.columns = [c if isinstance(c, str) else f"T_end_b{c:g}" for c in table.columns]
    return table


def _check_epsilons(eps_list: Sequence[float]) -> None:
    positive = [e for e in eps_list if e > 0]
    if len(positive) < 3 or max(positive) < 2 * min(positive):
        logger.warning(
            f"Sweep over {list(eps_list)} has fewer than 3 positive values or spans "
            "less than one octave; the exponent fit is not meaningful"
        )


def sweep(
    cfg: RunConfig,
    eps_list: Optional[Sequence[float]] = None,
    b_bar_list: Optional[Sequence[float]] = None,
    jobs: Optional[int] = None,
    out_dir: Optional[Union[str, Path]] = None,
    show_progress: bool = True,
) -> SweepResult:
    """Run every (epsilon, b_bar) cell and fit the lifespan exponent per b_bar.

    Cells are independent and run in a process pool when ``jobs > 1``; results
    are merged in (b_bar, epsilon) order whatever the completion order. With
    ``lifespan.synthetic_exponent`` set, no solver runs and synthetic records
    are fitted instead.

    Args:
        cfg: Run configuration
        eps_list: Perturbation sizes (default: lifespan.epsilons)
        b_bar_list: Field strengths (default: lifespan.b_bars)
        jobs: Worker processes (default: io.jobs)
        out_dir: Root directory for per-cell outputs
        show_progress: Display a tqdm bar

    Returns:
        SweepResult with records, fits and stabilization table
    """
    eps_list = list(cfg.lifespan.epsilons if eps_list is None else eps_list)
    b_bar_list = list(cfg.lifespan.b_bars if b_bar_list is None else b_bar_list)
    jobs = cfg.io.jobs if jobs is None else jobs
    _check_epsilons(eps_list)
    cells: List[Tuple[float, float]] = [(b, e) for b, e in product(b_bar_list, eps_list)]
    synthetic = cfg.lifespan.synthetic_exponent

    if synthetic is not None:
        logger.info(f"Synthetic sweep with exponent {synthetic}")
        records = synthetic_records(eps_list, b_bar_list, synthetic, cfg.lifespan.C_bar)
    else:
        cfg_dict = cfg.to_dict()
        out = str(out_dir) if out_dir is not None else None
        by_cell: Dict[Tuple[float, float], ExperimentRecord] = {}
        bar = tqdm(total=len(cells), desc="sweep", unit="cell", disable=not show_progress)
        if jobs > 1 and len(cells) > 1:
            with ProcessPoolExecutor(max_workers=min(jobs, len(cells))) as pool:
                futures = {
                    pool.submit(_run_cell, cfg_dict, eps, b_bar, out): (b_bar, eps)
                    for b_bar, eps in cells
                }
                for future in as_completed(futures):
                    by_cell[futures[future]] = future.result()
                    bar.update(1)
        else:
            for b_bar, eps in cells:
                by_cell[(b_bar, eps)] = _run_cell(cfg_dict, eps, b_bar, out)
                bar.update(1)
        bar.close()
        records = [by_cell[cell] for cell in cells]

    n_failed = sum(r.end_reason == "failed" for r in records)
    if n_failed:
        logger.warning(f"{n_failed} of {len(records)} cells failed; fitting the survivors")

    fits: Dict[float, LifespanFit] = {}
    fit_errors: Dict[float, str] = {}
    for b_bar in b_bar_list:
        try:
            fits[b_bar] = fit_lifespan_exponent(records, b_bar)
        except DegenerateFit as e:
            logger.warning(f"No lifespan fit for b_bar={b_bar:g}: {e}")
            fit_errors[b_bar] = str(e)

    theory = {
        str(eps): theoretical_lifespan(eps, cfg.lifespan.C_bar) for eps in eps_list if 0 < eps < 1
    }

    return SweepResult(
        records=records,
        fits=fits,
        fit_errors=fit_errors,
        stabilization=stabilization_table(records),
        metadata={
            "epsilons": eps_list,
            "b_bars": b_bar_list,
            "jobs": jobs,
            "synthetic_exponent": synthetic,
            "theoretical_lifespan": theory,
        },
    )
