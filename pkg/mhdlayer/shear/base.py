"""Shear profile container and the datum abstraction."""

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Dict, Type

import numpy as np

from ..exceptions import ConfigError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ShearProfile:
    """u_s(t, y) and its y-derivatives sampled on the y nodes.

    ``dy3`` equals the time derivative of ``dy1`` because u_s solves the heat
    equation; the transformed system needs it for the chain-rule term.
    """

    t: float
    u_bar: float
    y: np.ndarray
    values: np.ndarray
    dy1: np.ndarray
    dy2: np.ndarray
    dy3: np.ndarray
    datum: str = "erf"
    meta: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for name in ("y", "values", "dy1", "dy2", "dy3"):
            arr = np.array(getattr(self, name), dtype=np.float64)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def bracket_t(self) -> float:
        """Japanese bracket <t> = 1 + t."""
        return 1.0 + self.t

    def is_linear(self) -> bool:
        return bool(np.all(self.dy2 == 0.0))


class BaseShearDatum(ABC):
    """An initial shear datum together with its exact heat evolution."""

    name = "base"

    def __init__(self, u_bar: float = 1.0):
        if not math.isfinite(u_bar):
            raise ConfigError(f"physics.u_bar must be finite, got {u_bar}")
        self.u_bar = float(u_bar)

    @abstractmethod
    def initial_values(self, y: np.ndarray) -> np.ndarray:
        """Datum at t = 0."""
        pass

    @abstractmethod
    def profile(self, t: float, y: np.ndarray) -> ShearProfile:
        """Evolved profile with derivatives at time t."""
        pass


class ShearDatumFactory:
    """Factory for shear data selected by name."""

    _registry: Dict[str, Type[BaseShearDatum]] = {}

    @classmethod
    def register(cls, datum_cls: Type[BaseShearDatum]) -> Type[BaseShearDatum]:
        cls._registry[datum_cls.name] = datum_cls
        return datum_cls

    @classmethod
    def create(cls, name: str, u_bar: float = 1.0) -> BaseShearDatum:
        """Create a datum.

        Args:
            name: 'erf' or 'cutoff'
            u_bar: Far-field speed

        Returns:
            Datum instance

        Raises:
            ConfigError: If the name is unknown
        """
        try:
            datum_cls = cls._registry[name]
        except KeyError:
            raise ConfigError(
                f"physics.datum must be one of {sorted(cls._registry)}, got {name!r}"
            )
        logger.debug(f"Creating shear datum {name} (u_bar={u_bar})")
        return datum_cls(u_bar=u_bar)

    @classmethod
    def available(cls) -> list:
        return sorted(cls._registry)
