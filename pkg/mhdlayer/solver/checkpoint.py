"""Checkpoint files for bitwise restarts."""

import logging
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np

from ..exceptions import CheckpointError
from ..field_core import Field, Grid, load_snapshot, save_snapshot
from ..shear.base import ShearDatumFactory
from .state import PerturbationState

logger = logging.getLogger(__name__)

CHECKPOINT_VERSION = 1


def save_checkpoint(
    path: Union[str, Path],
    state: PerturbationState,
    dt: float,
    extra: Optional[Dict[str, Any]] = None,
    arrays: Optional[Dict[str, np.ndarray]] = None,
) -> Path:
    """Write the state, its AB2 history and caller metadata.

    Args:
        path: Target ``.npz`` file
        state: State to persist
        dt: Time step the state was produced with
        extra: JSON-serializable metadata (seed, tau, integrator memory, ...)
        arrays: Additional arrays stored next to the fields

    Returns:
        Path of the written file
    """
    fields: Dict[str, Any] = {"u": state.u, "b": state.b}
    if state.history is not None:
        fields["history_u"] = state.history[0]
        fields["history_b"] = state.history[1]
    for name, arr in (arrays or {}).items():
        fields[f"extra__{name}"] = arr
    metadata = {
        "version": CHECKPOINT_VERSION,
        "t": state.t,
        "step_index": state.step_index,
        "t0": state.t0,
        "b_bar": state.b_bar,
        "dt": dt,
        "datum": state.shear.datum,
        "u_bar": state.shear.u_bar,
        "extra": extra or {},
    }
    out = save_snapshot(path, state.grid, fields, metadata)
    logger.info(f"Checkpoint written: {out} (step {state.step_index}, t={state.t:.6g})")
    return out


def load_checkpoint(
    path: Union[str, Path], grid: Optional[Grid] = None
) -> Tuple[PerturbationState, Dict[str, Any], Dict[str, np.ndarray]]:
    """Read a checkpoint written by ``save_checkpoint``.

    Args:
        path: Checkpoint file
        grid: Grid of the running job; must match the stored grid when given

    Returns:
        (state, metadata, extra arrays)

    Raises:
        CheckpointError: If the file is unreadable or belongs to another grid
    """
    try:
        stored_grid, arrays, metadata = load_snapshot(path)
    except Exception as e:
        raise CheckpointError(f"cannot read checkpoint {path}: {e}") from e
    if metadata.get("version") != CHECKPOINT_VERSION:
        raise CheckpointError(f"unsupported checkpoint version in {path}")
    if grid is not None:
        if not grid.matches(stored_grid):
            raise CheckpointError(f"checkpoint {path} was written on {stored_grid}, not {grid}")
        stored_grid = grid

    datum = ShearDatumFactory.create(metadata["datum"], metadata["u_bar"])
    history = None
    if "history_u" in arrays:
        history = (arrays["history_u"], arrays["history_b"])
    state = PerturbationState.from_fields(
        Field(stored_grid, arrays["u"]),
        Field(stored_grid, arrays["b"]),
        datum.profile(metadata["t"], stored_grid),
        b_bar=metadata["b_bar"],
        t=metadata["t"],
        step_index=metadata["step_index"],
        history=history,
        t0=metadata.get("t0", 0.0),
    )
    extras = {k[len("extra__"):]: v for k, v in arrays.items() if k.startswith("extra__")}
    return state, metadata, extras
