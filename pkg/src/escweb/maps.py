"""Exponential-affine entire maps f(z) = a*z + b + c*exp(d*z) with real coefficients."""
from __future__ import annotations

import cmath
import enum
import math
import sys
from dataclasses import dataclass

# log of the largest finite binary64 value; exp(t) overflows for t above this
LOG_FLOAT_MAX = math.log(sys.float_info.max)


class Family(str, enum.Enum):
    FATOU = "fatou-type"
    BERGWEILER = "bergweiler-type"
    OTHER = "other"


@dataclass(frozen=True)
class ExpAffineMap:
    """Parameters of ``f(z) = a*z + b + c*exp(d*z)``.

    ``c`` and ``d`` must be non-zero, otherwise the map is affine.
    """

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        for name in ("a", "b", "c", "d"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise ValueError(f"coefficient {name} must be a finite real, got {value!r}")
            object.__setattr__(self, name, float(value))
        if self.c == 0 or self.d == 0:
            raise ValueError("c and d must be non-zero for a transcendental map")

    @property
    def family(self) -> Family:
        if self.a == 1 and self.b * self.d < 0:
            return Family.FATOU
        if self.a > 1:
            return Family.BERGWEILER
        return Family.OTHER

    @property
    def period(self) -> float:
        """Vertical period of the exponential term, 2*pi/|d|."""
        return 2 * math.pi / abs(self.d)

    def __call__(self, z: complex) -> complex:
        return evaluate(self, z)

    def as_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "c": self.c, "d": self.d,
                "family": self.family.value}


def fatou() -> ExpAffineMap:
    """z + 1 + exp(-z)."""
    return ExpAffineMap(1.0, 1.0, 1.0, -1.0)


def bergweiler() -> ExpAffineMap:
    """2z + 2 - log 2 - exp(z)."""
    return ExpAffineMap(2.0, 2.0 - math.log(2.0), -1.0, 1.0)


def is_fatou(f: ExpAffineMap) -> bool:
    return f == fatou()


def is_bergweiler(f: ExpAffineMap) -> bool:
    return f == bergweiler()


def _exp_term(f: ExpAffineMap, z: complex) -> complex:
    z = complex(z)
    if f.d * z.real > LOG_FLOAT_MAX:
        raise OverflowError(
            f"exp({f.d * z.real:.6g}) is not representable in binary64")
    return cmath.exp(f.d * z)


def evaluate(f: ExpAffineMap, z: complex) -> complex:
    """Return ``a*z + b + c*exp(d*z)``.

    Raises OverflowError when ``exp(d*Re z)`` exceeds the float range.
    """
    z = complex(z)
    return f.a * z + f.b + f.c * _exp_term(f, z)


def derivative(f: ExpAffineMap, z: complex) -> complex:
    z = complex(z)
    return f.a + f.c * f.d * _exp_term(f, z)


def log_modulus(f: ExpAffineMap, z: complex) -> float:
    """``log|f(z)|`` computed without forming ``exp(d*z)`` when it would overflow.

    Uses ``f(z) = c*exp(d*z) * (1 + (a*z + b) * exp(-d*z) / c)``, valid once the
    exponential term dominates. Falls back to direct evaluation otherwise.
    """
    z = complex(z)
    t = f.d * z.real
    if t <= LOG_FLOAT_MAX - 1:
        return math.log(abs(evaluate(f, z)))
    # exp(-d*z) underflows harmlessly here
    ratio = (f.a * z + f.b) * cmath.exp(-f.d * z) / f.c
    return math.log(abs(f.c)) + t + math.log(abs(1 + ratio))


def arg_image(f: ExpAffineMap, z: complex) -> float:
    """Argument of ``f(z)`` in (-pi, pi], stable when the exponential dominates."""
    z = complex(z)
    t = f.d * z.real
    if t <= LOG_FLOAT_MAX - 1:
        return cmath.phase(evaluate(f, z))
    ratio = (f.a * z + f.b) * cmath.exp(-f.d * z) / f.c
    phase = f.d * z.imag + (0.0 if f.c > 0 else math.pi) + cmath.phase(1 + ratio)
    return math.remainder(phase, 2 * math.pi)
