"""Zero sequences of genus-zero canonical products f(z) = prod (1 - z/z_m)^{k_m}."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import MinModError

EXACT_LIMIT = 2**53


@dataclass(frozen=True)
class ZeroEntry:
    log_radius: float
    log_multiplicity: float = 0.0
    exact_multiplicity: Optional[int] = 1
    angle: float = math.pi

    def __post_init__(self):
        if not math.isfinite(self.log_radius):
            raise MinModError("INVALID_ZERO", "log_radius must be finite")
        if not (self.log_multiplicity >= 0 and math.isfinite(self.log_multiplicity)):
            raise MinModError("INVALID_ZERO", "multiplicity must be >= 1")
        if self.exact_multiplicity is not None:
            k = self.exact_multiplicity
            if k < 1 or k > EXACT_LIMIT:
                raise MinModError("INVALID_ZERO", f"exact multiplicity {k} out of range")
            if abs(self.log_multiplicity - math.log(k)) > 1e-12:
                raise MinModError(
                    "INVALID_ZERO",
                    f"log_multiplicity {self.log_multiplicity!r} disagrees with exact {k}",
                )
        if not 0.0 <= self.angle < 2 * math.pi:
            raise MinModError("INVALID_ZERO", f"angle {self.angle!r} outside [0, 2pi)")

    @classmethod
    def make(cls, log_radius: float, multiplicity: int = 1, angle: float = math.pi) -> "ZeroEntry":
        return cls(log_radius, math.log(multiplicity), int(multiplicity), angle)

    @property
    def multiplicity(self) -> float:
        if self.exact_multiplicity is not None:
            return float(self.exact_multiplicity)
        return math.exp(self.log_multiplicity) if self.log_multiplicity < 709.78 else math.inf


@dataclass(frozen=True)
class ZeroSet:
    """Finite, radius-sorted prefix of a zero sequence (so f(0) = 1)."""

    entries: tuple[ZeroEntry, ...]
    truncation_note: str = ""

    def __init__(self, entries: Iterable[ZeroEntry], truncation_note: str = ""):
        entries = tuple(entries)
        for prev, cur in zip(entries, entries[1:]):
            if cur.log_radius == prev.log_radius:
                raise MinModError("DUPLICATE_RADIUS", f"log radius {cur.log_radius!r} repeated")
            if cur.log_radius < prev.log_radius:
                raise MinModError("UNSORTED", "entries must have increasing log_radius")
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "truncation_note", truncation_note)

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    def require_nonempty(self):
        if not self.entries:
            raise MinModError("EMPTY_ZEROSET", "zero set has no entries")

    @cached_property
    def log_radii(self) -> np.ndarray:
        return np.array([e.log_radius for e in self.entries], dtype=float)

    @cached_property
    def log_mults(self) -> np.ndarray:
        return np.array([e.log_multiplicity for e in self.entries], dtype=float)

    @cached_property
    def mults(self) -> np.ndarray:
        """Multiplicities as floats; ``inf`` for those beyond binary64."""
        return np.array([e.multiplicity for e in self.entries], dtype=float)

    @cached_property
    def angles(self) -> np.ndarray:
        return np.array([e.angle for e in self.entries], dtype=float)

    @cached_property
    def common_angle(self) -> Optional[float]:
        """The shared argument when every zero lies on one ray, else None."""
        if not self.entries:
            return None
        a0 = self.entries[0].angle
        return a0 if all(e.angle == a0 for e in self.entries) else None

    @property
    def on_common_ray(self) -> bool:
        return self.common_angle is not None

    @property
    def total_multiplicity(self) -> float:
        return float(self.mults.sum())

    def prefix(self, count: int) -> "ZeroSet":
        return ZeroSet(self.entries[:count], self.truncation_note)


def e_m_squared(m_max: int, angle: float = 0.0) -> ZeroSet:
    """Simple zeros at e^{m^2}, m = 1..m_max: a standard order-zero fixture."""
    return ZeroSet(
        [ZeroEntry.make(float(m * m), 1, angle) for m in range(1, m_max + 1)],
        truncation_note=f"zeros e^(m^2) truncated after m={m_max}",
    )


def single_zero(radius: float = 1.0, multiplicity: int = 1, angle: float = math.pi) -> ZeroSet:
    return ZeroSet([ZeroEntry.make(math.log(radius), multiplicity, angle)])


def from_radii(radii: Sequence[float], mults: Optional[Sequence[int]] = None, angle: float = math.pi) -> ZeroSet:
    mults = mults if mults is not None else [1] * len(radii)
    order = np.argsort(radii)
    return ZeroSet(ZeroEntry.make(math.log(radii[i]), int(mults[i]), angle) for i in order)
