# mhdlayer/config.py

import hashlib
import json
import logging
import math
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Union

from .exceptions import ConfigError
from .field_core import Grid
from .shear import ShearDatumFactory
from .solver.state import SCHEMES, SolverConfig

logger = logging.getLogger(__name__)


class InternalConfig:
    # Internal defaults and tolerances (not exposed in run configs)
    m_max = 16  # highest tangential derivative in the analytic norms
    radius_floor_fraction = 0.25  # a run ends once tau < tau0 * this
    uniqueness_tau_fraction = 0.125  # tau(0) of the two-step-size diagnostic

    # Shear verification window
    shear_window = (10.0, 1000.0)
    shear_samples = 40
    shear_resolution = 0.05  # y spacing in units of sqrt(1 + t0)

    # Output layout
    manifest_name = "manifest.json"
    trace_name = "trace.csv"
    record_name = "record.json"
    checkpoint_dir = "checkpoints"


@dataclass(frozen=True)
class GridBlock:
    nx: int = 32
    ny: int = 128
    L_x: float = 2.0 * math.pi
    y_max: float = 15.0
    stretch: float = 0.0

    def validate(self) -> None:
        if self.nx < 4 or self.nx % 2:
            raise ConfigError(f"grid.nx must be an even integer >= 4, got {self.nx}")
        if self.ny < 8:
            raise ConfigError(f"grid.ny must be an integer >= 8, got {self.ny}")
        if not self.y_max > 0:
            raise ConfigError(f"grid.y_max must be positive, got {self.y_max}")
        if not self.L_x > 0:
            raise ConfigError(f"grid.L_x must be positive, got {self.L_x}")
        if self.stretch < 0:
            raise ConfigError(f"grid.stretch must be >= 0, got {self.stretch}")

    def build(self, stencil_scale: float = 1.0) -> Grid:
        return Grid(self.nx, self.ny, self.L_x, self.y_max, self.stretch, stencil_scale)


@dataclass(frozen=True)
class SolverBlock:
    dt: float = 2e-3
    t_max: float = 5.0
    scheme: str = "imex-cn"
    blowup_threshold: float = 1e3
    cfl_check: bool = True

    def validate(self) -> None:
        if self.scheme not in SCHEMES:
            raise ConfigError(f"solver.scheme must be one of {SCHEMES}, got {self.scheme!r}")
        self.to_solver_config()

    def to_solver_config(self) -> SolverConfig:
        return SolverConfig(
            dt=self.dt,
            t_max=self.t_max,
            scheme=self.scheme,
            blowup_threshold=self.blowup_threshold,
            cfl_check=self.cfl_check,
        )


@dataclass(frozen=True)
class PhysicsBlock:
    b_bar: float = 1.0
    u_bar: float = 1.0
    datum: str = "erf"

    def validate(self) -> None:
        if self.datum not in ShearDatumFactory.available():
            raise ConfigError(
                f"physics.datum must be one of {ShearDatumFactory.available()}, got {self.datum!r}"
            )
        if not math.isfinite(self.b_bar):
            raise ConfigError("physics.b_bar must be finite")
        if not math.isfinite(self.u_bar):
            raise ConfigError("physics.u_bar must be finite")


@dataclass(frozen=True)
class NormsBlock:
    tau0: float = 0.25
    alpha: float = 0.5
    m_max: int = InternalConfig.m_max
    sample_every: int = 10

    def validate(self) -> None:
        if not self.tau0 > 0:
            raise ConfigError(f"norms.tau0 must be positive, got {self.tau0}")
        if not 0.25 <= self.alpha <= 0.5:
            raise ConfigError(f"norms.alpha must lie in [1/4, 1/2], got {self.alpha}")
        if self.m_max < 1:
            raise ConfigError(f"norms.m_max must be >= 1, got {self.m_max}")
        if self.sample_every < 1:
            raise ConfigError(f"norms.sample_every must be >= 1, got {self.sample_every}")


@dataclass(frozen=True)
class LifespanBlock:
    epsilons: List[float] = field(default_factory=lambda: [0.2, 0.1, 0.05, 0.025])
    b_bars: List[float] = field(default_factory=lambda: [1.0, 0.0])
    C: float = 1.0
    C0_source: str = "config"
    C0: float = 1.0
    C_bar: float = 1.0
    lam: float = 1.5
    norm_cap_factor: float = 1e3
    n_modes: int = 4
    rho: float = 0.5
    calibration_steps: int = 200
    synthetic_exponent: Optional[float] = None

    def validate(self) -> None:
        if not self.epsilons:
            raise ConfigError("lifespan.epsilons must not be empty")
        for eps in self.epsilons:
            if not 0.0 <= eps < 1.0:
                raise ConfigError(f"lifespan.epsilons entries must lie in [0, 1), got {eps}")
        if not self.b_bars:
            raise ConfigError("lifespan.b_bars must not be empty")
        for name in ("C", "C0", "C_bar"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"lifespan.{name} must be positive")
        if self.C0_source not in ("config", "monitor"):
            raise ConfigError(
                f"lifespan.C0_source must be 'config' or 'monitor', got {self.C0_source!r}"
            )
        if not 1.5 <= self.lam < 2.0:
            raise ConfigError(f"lifespan.lam must lie in [3/2, 2), got {self.lam}")
        if not self.norm_cap_factor > 1:
            raise ConfigError(f"lifespan.norm_cap_factor must exceed 1, got {self.norm_cap_factor}")
        if self.n_modes < 1:
            raise ConfigError(f"lifespan.n_modes must be >= 1, got {self.n_modes}")
        if not 0.0 < self.rho < 1.0:
            raise ConfigError(f"lifespan.rho must lie in (0, 1), got {self.rho}")
        if self.calibration_steps < 2:
            raise ConfigError(
                f"lifespan.calibration_steps must be >= 2, got {self.calibration_steps}"
            )


@dataclass(frozen=True)
class IOBlock:
    out_dir: str = "runs"
    checkpoint_every: int = 0
    seed: int = 0
    jobs: int = 1
    save_traces: bool = True

    def validate(self) -> None:
        if self.checkpoint_every < 0:
            raise ConfigError(f"io.checkpoint_every must be >= 0, got {self.checkpoint_every}")
        if self.seed < 0:
            raise ConfigError(f"io.seed must be >= 0, got {self.seed}")
        if self.jobs < 1:
            raise ConfigError(f"io.jobs must be >= 1, got {self.jobs}")


@dataclass(frozen=True)
class VerifyBlock:
    n_samples: int = 1000
    alphas: List[float] = field(default_factory=lambda: [0.25, 0.5])
    times: List[float] = field(default_factory=lambda: [0.0, 1.0, 10.0])
    betas: List[float] = field(default_factory=lambda: [0.1, 0.25, 0.4])
    tolerance: float = 1e-8
    stencil_scale: float = 1.0
    equilibrium_steps: int = 10_000

    def validate(self) -> None:
        if self.n_samples < 1:
            raise ConfigError(f"verify.n_samples must be >= 1, got {self.n_samples}")
        if self.equilibrium_steps < 1:
            raise ConfigError(
                f"verify.equilibrium_steps must be >= 1, got {self.equilibrium_steps}"
            )
        for alpha in self.alphas:
            if not 0.25 <= alpha <= 0.5:
                raise ConfigError(f"verify.alphas entries must lie in [1/4, 1/2], got {alpha}")
        for t in self.times:
            if t < 0:
                raise ConfigError(f"verify.times entries must be >= 0, got {t}")
        for beta in self.betas:
            if not 0.0 < beta < 0.5:
                raise ConfigError(f"verify.betas entries must lie in (0, 1/2), got {beta}")
        if not self.tolerance > 0:
            raise ConfigError(f"verify.tolerance must be positive, got {self.tolerance}")
        if not self.stencil_scale > 0:
            raise ConfigError(f"verify.stencil_scale must be positive, got {self.stencil_scale}")


BLOCKS = {
    "grid": GridBlock,
    "solver": SolverBlock,
    "physics": PhysicsBlock,
    "norms": NormsBlock,
    "lifespan": LifespanBlock,
    "io": IOBlock,
    "verify": VerifyBlock,
}


def _check_type(block: str, name: str, default: Any, value: Any) -> Any:
    """Coerce ``value`` to the type of the field default or raise ConfigError."""
    where = f"{block}.{name}"
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{where} must be a boolean, got {value!r}")
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{where} must be an integer, got {value!r}")
        return value
    if isinstance(default, float) or default is None:
        if default is None and value is None:
            return None
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where} must be a number, got {value!r}")
        return float(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(f"{where} must be a string, got {value!r}")
        return value
    if isinstance(default, list):
        if not isinstance(value, list):
            raise ConfigError(f"{where} must be a list, got {value!r}")
        out = []
        for item in value:
            if isinstance(item, bool) or not isinstance(item, (int, float)):
                raise ConfigError(f"{where} entries must be numbers, got {item!r}")
            out.append(float(item))
        return out
    return value


def _build_block(name: str, data: Any) -> Any:
    cls = BLOCKS[name]
    if not isinstance(data, Mapping):
        raise ConfigError(f"{name} must be an object, got {type(data).__name__}")
    defaults = cls()
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"{name}.{unknown[0]} is not a known option")
    values = {
        key: _check_type(name, key, getattr(defaults, key), value) for key, value in data.items()
    }
    block = cls(**values)
    block.validate()
    return block


@dataclass(frozen=True)
class RunConfig:
    """Complete, validated configuration of a run."""

    grid: GridBlock = field(default_factory=GridBlock)
    solver: SolverBlock = field(default_factory=SolverBlock)
    physics: PhysicsBlock = field(default_factory=PhysicsBlock)
    norms: NormsBlock = field(default_factory=NormsBlock)
    lifespan: LifespanBlock = field(default_factory=LifespanBlock)
    io: IOBlock = field(default_factory=IOBlock)
    verify: VerifyBlock = field(default_factory=VerifyBlock)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "RunConfig":
        """Build a config from parsed JSON.

        Raises:
            ConfigError: On unknown blocks or options, wrong types or violated
                constraints; the message names block.field
        """
        if not isinstance(data, Mapping):
            raise ConfigError("config root must be an object")
        unknown = sorted(set(data) - set(BLOCKS))
        if unknown:
            raise ConfigError(f"{unknown[0]} is not a known config block")
        blocks = {name: _build_block(name, data.get(name, {})) for name in BLOCKS}
        cfg = cls(**blocks)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        for name in BLOCKS:
            getattr(self, name).validate()
        if self.lifespan.n_modes >= self.grid.nx // 2:
            raise ConfigError(
                f"lifespan.n_modes must be < grid.nx/2 = {self.grid.nx // 2}, "
                f"got {self.lifespan.n_modes}"
            )

    def to_dict(self) -> Dict[str, Any]:
        return {name: asdict(getattr(self, name)) for name in BLOCKS}

    def with_overrides(
        self,
        seed: Optional[int] = None,
        jobs: Optional[int] = None,
        out: Optional[str] = None,
        synthetic_exponent: Optional[float] = None,
    ) -> "RunConfig":
        """Apply command-line overrides and re-validate."""
        io_changes: Dict[str, Any] = {}
        if seed is not None:
            io_changes["seed"] = seed
        if jobs is not None:
            io_changes["jobs"] = jobs
        if out is not None:
            io_changes["out_dir"] = str(out)
        cfg = replace(self, io=replace(self.io, **io_changes))
        if synthetic_exponent is not None:
            cfg = replace(
                cfg, lifespan=replace(cfg.lifespan, synthetic_exponent=float(synthetic_exponent))
            )
        cfg.validate()
        return cfg


def load_config(path: Optional[Union[str, Path]] = None) -> RunConfig:
    """Read a JSON run config; defaults when ``path`` is None.

    Raises:
        ConfigError: If the file is missing, is not valid JSON (the message
            carries line and column) or fails validation
    """
    if path is None:
        cfg = RunConfig()
        cfg.validate()
        return cfg
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}:{e.lineno}:{e.colno}: {e.msg}") from e
    cfg = RunConfig.from_dict(data)
    logger.info(f"Loaded config {path} (sha256 {config_hash(cfg)[:12]})")
    return cfg


def config_hash(cfg: RunConfig) -> str:
    """sha256 of the canonical JSON form of the resolved config."""
    canonical = json.dumps(cfg.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
