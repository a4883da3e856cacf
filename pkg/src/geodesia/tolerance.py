"""Relative tolerance family. Every value is multiplied by the mesh diameter."""
from __future__ import annotations

from dataclasses import asdict, dataclass, replace

TOL_MIN = 1e-14
TOL_MAX = 1e-3


@dataclass(frozen=True)
class Tolerances:
    plane: float = 1e-9
    rigid: float = 1e-10
    pt: float = 1e-9
    col: float = 1e-8
    ridge: float = 1e-8
    tie: float = 1e-9
    event: float = 1e-10
    area: float = 1e-12

    def with_overrides(self, overrides: dict[str, float]) -> "Tolerances":
        known = asdict(self)
        for name, value in overrides.items():
            if name not in known:
                raise KeyError(f"unknown tolerance {name!r}")
            if not (TOL_MIN <= value <= TOL_MAX):
                raise ValueError(f"tolerance {name}={value} outside [{TOL_MIN}, {TOL_MAX}]")
        return replace(self, **overrides)

    def as_dict(self) -> dict[str, float]:
        return asdict(self)


DEFAULT = Tolerances()
