"""Result classes for lifespan runs and sweeps with CSV, markdown and dict exports."""

import io
import json
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)

END_REASONS = ("radius-floor", "norm-cap", "nonfinite", "horizon", "synthetic", "failed")
CENSORED_REASONS = ("horizon",)
SUMMARY_COLUMNS = ["epsilon", "b_bar", "T_end", "end_reason", "tau_final"]


def _markdown_table(frame: pd.DataFrame) -> str:
    """Render a frame as a GitHub markdown table."""
    headers = [str(c) for c in frame.columns]
    lines = ["| " + " | ".join(headers) + " |", "|" + "---|" * len(headers)]
    for row in frame.itertuples(index=False):
        cells = [f"{v:.6g}" if isinstance(v, float) else str(v) for v in row]
        lines.append("| " + " | ".join(cells) + " |")
    return "\n".join(lines)


def _json_safe(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, (np.floating, np.integer)):
        return _json_safe(value.item())
    if isinstance(value, dict):
        return {str(k): _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    return value


@dataclass
class ExperimentRecord:
    """Outcome of one lifespan run."""

    epsilon: float
    b_bar: float
    T_end: float
    end_reason: str
    tau_final: float
    params: Dict[str, Any] = field(default_factory=dict)
    seed: int = 0
    config_hash: str = ""
    grid: Dict[str, Any] = field(default_factory=dict)
    steps: int = 0
    trace: Optional[pd.DataFrame] = None
    paths: Dict[str, str] = field(default_factory=dict)
    error: Optional[str] = None

    def __post_init__(self) -> None:
        if self.end_reason not in END_REASONS:
            raise ValueError(f"unknown end reason {self.end_reason!r}")

    @property
    def censored(self) -> bool:
        return self.end_reason in CENSORED_REASONS

    @property
    def usable(self) -> bool:
        """True when the lifespan may enter a scaling fit."""
        return (
            not self.censored
            and self.end_reason != "failed"
            and math.isfinite(self.T_end)
            and self.T_end > 0
        )

    def summary_row(self) -> Dict[str, Any]:
        return {
            "epsilon": self.epsilon,
            "b_bar": self.b_bar,
            "T_end": self.T_end,
            "end_reason": self.end_reason,
            "tau_final": self.tau_final,
        }

    def extract_data(self, include_trace: bool = False) -> Dict[str, Any]:
        """Export as a JSON-ready dictionary.

        Args:
            include_trace: Embed the sampled trace rows instead of only its path
        """
        data: Dict[str, Any] = {
            **self.summary_row(),
            "params": self.params,
            "seed": self.seed,
            "config_hash": self.config_hash,
            "grid": self.grid,
            "steps": self.steps,
            "paths": self.paths,
            "error": self.error,
        }
        if include_trace and self.trace is not None:
            data["trace"] = self.trace.to_dict(orient="records")
        return _json_safe(data)

    def extract_csv(self) -> str:
        """Export the sampled trace as CSV; the summary row when no trace was kept."""
        frame = self.trace if self.trace is not None else pd.DataFrame([self.summary_row()])
        buffer = io.StringIO()
        frame.to_csv(buffer, index=False)
        return buffer.getvalue()

    def extract_markdown(self) -> str:
        lines = [
            f"## Lifespan run eps={self.epsilon:g}, b_bar={self.b_bar:g}",
            "",
            _markdown_table(pd.DataFrame([self.summary_row()])),
        ]
        if self.error:
            lines += ["", f"Error: {self.error}"]
        return "\n".join(lines)

    def to_json(self) -> str:
        return json.dumps(self.extract_data(), indent=2, sort_keys=True)


@dataclass
class LifespanFit:
    """Least-squares fit log T_end = lam_fit log(1/eps) + intercept for one b_bar."""

    b_bar: float
    lam_fit: float
    intercept: float
    residuals: List[float]
    n_used: int
    n_censored: int
    n_failed: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return _json_safe(
            {
                "b_bar": self.b_bar,
                "lam_fit": self.lam_fit,
                "intercept": self.intercept,
                "residuals": self.residuals,
                "n_used": self.n_used,
                "n_censored": self.n_censored,
                "n_failed": self.n_failed,
            }
        )


@dataclass
class SweepResult:
    """All cells of an epsilon x b_bar sweep with fits and the stabilization table."""

    records: List[ExperimentRecord]
    fits: Dict[float, LifespanFit] = field(default_factory=dict)
    fit_errors: Dict[float, str] = field(default_factory=dict)
    stabilization: Optional[pd.DataFrame] = None
    metadata: Dict[str, Any] = field(default_factory=dict)

    def summary_frame(self) -> pd.DataFrame:
        return pd.DataFrame([r.summary_row() for r in self.records], columns=SUMMARY_COLUMNS)

    def extract_data(self) -> Dict[str, Any]:
        data = {
            "cells": [r.extract_data() for r in self.records],
            "fits": {str(k): v.to_dict() for k, v in self.fits.items()},
            "fit_errors": {str(k): v for k, v in self.fit_errors.items()},
            "metadata": self.metadata,
        }
        if self.stabilization is not None:
            data["stabilization"] = self.stabilization.to_dict(orient="records")
        return _json_safe(data)

    def extract_csv(self) -> str:
        """CSV summary with columns epsilon, b_bar, T_end, end_reason, tau_final."""
        buffer = io.StringIO()
        self.summary_frame().to_csv(buffer, index=False)
        return buffer.getvalue()

    def extract_markdown(self) -> str:
        parts = ["# Lifespan sweep", "", _markdown_table(self.summary_frame())]
        if self.fits or self.fit_errors:
            parts += ["", "## Scaling fits", ""]
            for b_bar, fit in sorted(self.fits.items()):
                parts.append(
                    f"- b_bar={b_bar:g}: lam_fit={fit.lam_fit:.4f} "
                    f"({fit.n_used} cells, {fit.n_censored} censored)"
                )
            for b_bar, err in sorted(self.fit_errors.items()):
                parts.append(f"- b_bar={b_bar:g}: no fit ({err})")
        if self.stabilization is not None and not self.stabilization.empty:
            parts += ["", "## Stabilization", "", _markdown_table(self.stabilization.reset_index())]
        return "\n".join(parts)
