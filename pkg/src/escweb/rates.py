"""Escape-rate threshold sequences a_n."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

SQRT2 = math.sqrt(2.0)


class RateKind(str, enum.Enum):
    ARITHMETIC = "arithmetic"
    GEOMETRIC = "geometric"


@dataclass(frozen=True)
class RateSequence:
    """Thresholds ``(n+m)/2`` (arithmetic) or ``sqrt(2)**(n+m)`` (geometric)."""

    kind: RateKind
    m: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", RateKind(self.kind))
        if int(self.m) != self.m or self.m < 0:
            raise ValueError(f"offset m must be a non-negative integer, got {self.m!r}")
        object.__setattr__(self, "m", int(self.m))

    @classmethod
    def arithmetic(cls, m: int) -> "RateSequence":
        return cls(RateKind.ARITHMETIC, m)

    @classmethod
    def geometric(cls, m: int = 0) -> "RateSequence":
        return cls(RateKind.GEOMETRIC, m)

    @property
    def code(self) -> int:
        return 0 if self.kind is RateKind.ARITHMETIC else 1

    def __call__(self, n: int) -> float:
        # n = 0 is allowed; certificates use it as the base of the induction
        if n < 0:
            raise ValueError("n must be >= 0")
        if self.kind is RateKind.ARITHMETIC:
            return (n + self.m) / 2
        return SQRT2 ** (n + self.m)

    def log(self, n: int) -> float:
        if self.kind is RateKind.ARITHMETIC:
            return math.log((n + self.m) / 2)
        return 0.5 * math.log(2.0) * (n + self.m)

    def values(self, n_max: int) -> np.ndarray:
        """Array ``[a_1, ..., a_{n_max}]``."""
        return np.array([self(n) for n in range(1, n_max + 1)])

    def as_dict(self) -> dict:
        return {"kind": self.kind.value, "m": self.m}
