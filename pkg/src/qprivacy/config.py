"""Numerical tolerances shared by every module.

A single immutable record holds all thresholds; callers that need a
different setting pass ``Tolerances(...)`` or use :meth:`Tolerances.replace`.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

from .errors import ConfigError


@dataclass(frozen=True)
class Tolerances:
    hermiticity: float = 1e-10
    unitarity: float = 1e-9
    psd_clip: float = 1e-9
    trace: float = 1e-10
    completeness: float = 1e-9
    inequality: float = 1e-8
    # discord optimizer granularity is absorbed here (theorem-3 family)
    discord_inequality: float = 1e-6
    max_dim: int = 4096

    def __post_init__(self):
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if not value >= 0:
                raise ConfigError(f"tolerance {f.name!r} must be non-negative, got {value!r}")
        if self.max_dim < 1:
            raise ConfigError("max_dim must be >= 1")

    def replace(self, **changes) -> "Tolerances":
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


DEFAULT = Tolerances()
