"""Orbit classification against escape-rate thresholds.

A point ``z`` belongs to the uniform escape set for thresholds ``a_n`` when
``|f^n(z)| >= a_n`` for every ``n >= 1``. Finite iteration can refute
membership (``VIOLATED``) but can only confirm it through an absorbing
certificate: a region whose points provably satisfy every later threshold.

Certificates
------------
half-plane
    ``u = sigma*Re z`` with ``sigma = -sign(d)`` (the side where the
    exponential decays). For ``u >= U`` the map satisfies
    ``sigma*Re f(z) >= a*u + sigma*b - |c|*exp(-|d|*u)``. ``U`` is chosen so
    this lower bound is ``>= u + 1/2`` (arithmetic rates) or
    ``>= sqrt(2)*u`` (geometric rates). Firing at step ``n0`` additionally
    needs ``u >= a_{n0}``.
basin lattice
    For integer ``a`` and real ``d``, ``f(z + i*P*k) = f(z) + i*a*P*k`` with
    ``P = 2*pi/|d|``. If the residue ``w = z - i*P*k`` sits in a closed disc
    the map sends into itself, then ``|Im f^t(z)| >= a**t*|k|*P - rho`` for all
    ``t``. Only the superattracting disc ``D(log 2, 1/2)`` of the canonical
    Bergweiler map is registered.

Anything that would overflow binary64 before a decision is reported as
``RANGE_EXCEEDED``; it is never folded into membership or violation.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numba
import numpy as np

from .maps import LOG_FLOAT_MAX, ExpAffineMap, is_bergweiler
from .rates import SQRT2, RateKind, RateSequence

DEFAULT_BUDGET = 200
_LOG_MAX = LOG_FLOAT_MAX


class OutcomeClass(enum.IntEnum):
    VIOLATED = 0
    MEMBER = 1
    BUDGET_EXHAUSTED = 2
    RANGE_EXCEEDED = 3


class Certificate(enum.IntEnum):
    NONE = 0
    RIGHT_HALF_PLANE = 1
    LEFT_HALF_PLANE = 2
    BASIN_LATTICE = 3
    # fast-escape only: every representable threshold met and the orbit leaves
    # the float range exactly where the thresholds do
    RANGE_HORIZON = 4


@dataclass(frozen=True)
class OrbitOutcome:
    cls: OutcomeClass
    step: int
    certificate: Certificate | None = None

    @property
    def is_member(self) -> bool:
        return self.cls is OutcomeClass.MEMBER

    def as_dict(self) -> dict:
        return {"class": self.cls.name, "step": self.step,
                "certificate": None if self.certificate is None else self.certificate.name}

    def __repr__(self):
        cert = "" if self.certificate is None else f", {self.certificate.name}"
        return f"{self.cls.name}({self.step}{cert})"


@dataclass(frozen=True)
class CertificateParams:
    """Numbers the kernel needs; ``direction == 0`` disables the half-plane test."""

    direction: int = 0
    floor: float = math.inf
    basin: bool = False
    basin_center: float = 0.0
    basin_radius: float = 0.0
    lattice_period: float = 0.0
    lattice_factor: float = 0.0

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def _first_nonnegative(h, lo: float = 0.0, hi_cap: float = 1e9) -> float | None:
    """Smallest ``u >= lo`` with ``h(u) >= 0`` for nondecreasing ``h``."""
    if h(lo) >= 0:
        return lo
    hi = max(1.0, lo)
    while h(hi) < 0:
        hi *= 2
        if hi > hi_cap:
            return None
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if h(mid) >= 0:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-12 * max(1.0, hi):
            break
    return hi


def halfplane_cutoff(f: ExpAffineMap, rates: RateSequence) -> tuple[int, float] | None:
    """Direction and cutoff of the absorbing half-plane, or None if no cutoff exists."""
    sigma = -1 if f.d > 0 else 1
    sb = sigma * f.b
    cabs, dabs = abs(f.c), abs(f.d)
    if rates.kind is RateKind.ARITHMETIC:
        if f.a < 1:
            return None
        slope, shift, floor = f.a - 1.0, sb - 0.5, 1.0
    else:
        if f.a < SQRT2:
            return None
        slope, shift, floor = f.a - SQRT2, sb, 6.0
    if slope == 0 and shift <= 0:
        return None

    def h(u):
        return slope * u + shift - cabs * math.exp(-dabs * u)

    u = _first_nonnegative(h)
    if u is None:
        return None
    return sigma, max(floor, u)


BASIN_RADIUS = 0.5


def certificate_params(f: ExpAffineMap, rates: RateSequence) -> CertificateParams:
    hp = halfplane_cutoff(f, rates)
    kw = {}
    if hp is not None:
        kw["direction"], kw["floor"] = hp
    if is_bergweiler(f):
        # |g(log2 + h) - log2| = 2|e^h - 1 - h| <= 2(e^r - 1 - r) <= r for r = 1/2
        kw.update(basin=True, basin_center=math.log(2.0), basin_radius=BASIN_RADIUS,
                  lattice_period=f.period, lattice_factor=f.a)
    return CertificateParams(**kw)


# ----------------------------------------------------------------------------
# kernels


@numba.njit(cache=True, inline="always")
def _rate(kind, m, n):
    if kind == 0:
        return (n + m) / 2.0
    return math.sqrt(2.0) ** (n + m)


@numba.njit(cache=True)
def _classify_one(x, y, a, b, c, d, kind, m, budget, hp_dir, hp_floor,
                  basin, bcx, brad, period):
    for n in range(budget + 1):
        thr = _rate(kind, m, n)
        if n >= 1:
            if math.hypot(x, y) < thr:
                return 0, n, 0
        if hp_dir != 0:
            u = hp_dir * x
            if u >= hp_floor and u >= thr:
                return 1, n, (1 if hp_dir > 0 else 2)
        if basin:
            k = np.round(y / period)
            if k != 0.0:
                wy = y - k * period
                margin = 1e-15 * (1.0 + abs(y))
                need = thr if (kind == 1 or thr >= 0.5) else 0.5
                if (math.hypot(x - bcx, wy) <= brad - margin
                        and abs(k) * period - brad >= need):
                    return 1, n, 3
        if n == budget:
            return 2, n, 0
        ex = d * x
        if ex > _LOG_MAX:
            return 3, n, 0
        e = math.exp(ex)
        cy = math.cos(d * y)
        sy = math.sin(d * y)
        nx = (a * x + b) + c * (e * cy)
        ny = a * y + c * (e * sy)
        if not (math.isfinite(nx) and math.isfinite(ny)):
            return 3, n, 0
        x = nx
        y = ny
    return 2, budget, 0


@numba.njit(cache=True, parallel=True)
def _classify_many(xs, ys, a, b, c, d, kind, m, budget, hp_dir, hp_floor,
                   basin, bcx, brad, period, out_cls, out_step, out_cert):
    for i in numba.prange(xs.shape[0]):
        cl, st, ce = _classify_one(xs[i], ys[i], a, b, c, d, kind, m, budget,
                                   hp_dir, hp_floor, basin, bcx, brad, period)
        out_cls[i] = cl
        out_step[i] = st
        out_cert[i] = ce


@numba.njit(cache=True)
def _fast_one(x, y, a, b, c, d, table, horizon_ok, budget):
    # table[n-1] = M^n(R) for n = 1..len(table)
    N = table.shape[0]
    for n in range(budget + 1):
        if n >= 1:
            if n <= N:
                if math.hypot(x, y) < table[n - 1]:
                    return 0, n, 0
            elif horizon_ok:
                # finite iterate, threshold beyond the float range
                return 0, n, 0
        if n == budget:
            return 2, n, 0
        ex = d * x
        over = ex > _LOG_MAX
        nx = 0.0
        ny = 0.0
        if not over:
            e = math.exp(ex)
            nx = (a * x + b) + c * (e * math.cos(d * y))
            ny = a * y + c * (e * math.sin(d * y))
            over = not (math.isfinite(nx) and math.isfinite(ny))
        if over:
            if n == N and horizon_ok:
                return 1, n, 4
            return 3, n, 0
        x = nx
        y = ny
    return 2, budget, 0


@numba.njit(cache=True, parallel=True)
def _fast_many(xs, ys, a, b, c, d, table, horizon_ok, budget, out_cls, out_step, out_cert):
    for i in numba.prange(xs.shape[0]):
        cl, st, ce = _fast_one(xs[i], ys[i], a, b, c, d, table, horizon_ok, budget)
        out_cls[i] = cl
        out_step[i] = st
        out_cert[i] = ce


# ----------------------------------------------------------------------------
# public API


def _outcome(cl: int, st: int, ce: int) -> OrbitOutcome:
    cert = Certificate(ce) if ce != 0 else None
    return OrbitOutcome(OutcomeClass(cl), int(st), cert)


def classify_arrays(f: ExpAffineMap, rates: RateSequence, xs: np.ndarray, ys: np.ndarray,
                    budget: int = DEFAULT_BUDGET, params: CertificateParams | None = None):
    """Vectorised classification; returns ``(classes int8, steps int32, certs int8)``."""
    if budget < 1:
        raise ValueError("budget must be >= 1")
    if params is None:
        params = certificate_params(f, rates)
    xs = np.ascontiguousarray(xs, dtype=np.float64).ravel()
    ys = np.ascontiguousarray(ys, dtype=np.float64).ravel()
    if xs.shape != ys.shape:
        raise ValueError("xs and ys must have the same size")
    out_cls = np.empty(xs.shape, np.int8)
    out_step = np.empty(xs.shape, np.int32)
    out_cert = np.empty(xs.shape, np.int8)
    _classify_many(xs, ys, f.a, f.b, f.c, f.d, rates.code, float(rates.m), int(budget),
                   params.direction, params.floor, params.basin, params.basin_center,
                   params.basin_radius, params.lattice_period or 1.0,
                   out_cls, out_step, out_cert)
    return out_cls, out_step, out_cert


def classify_point(f: ExpAffineMap, rates: RateSequence, z: complex,
                   budget: int = DEFAULT_BUDGET) -> OrbitOutcome:
    """Classify one point against ``|f^n(z)| >= a_n``.

    >>> from escweb.maps import fatou
    >>> classify_point(fatou(), RateSequence.arithmetic(6), 6.0)
    MEMBER(0, RIGHT_HALF_PLANE)
    """
    z = complex(z)
    cl, st, ce = classify_arrays(f, rates, np.array([z.real]), np.array([z.imag]), budget)
    return _outcome(int(cl[0]), int(st[0]), int(ce[0]))


def fast_escape_arrays(f: ExpAffineMap, xs, ys, table: np.ndarray, horizon_ok: bool,
                       budget: int = DEFAULT_BUDGET):
    xs = np.ascontiguousarray(xs, dtype=np.float64).ravel()
    ys = np.ascontiguousarray(ys, dtype=np.float64).ravel()
    out_cls = np.empty(xs.shape, np.int8)
    out_step = np.empty(xs.shape, np.int32)
    out_cert = np.empty(xs.shape, np.int8)
    _fast_many(xs, ys, f.a, f.b, f.c, f.d, np.ascontiguousarray(table, dtype=np.float64),
               bool(horizon_ok), int(budget), out_cls, out_step, out_cert)
    return out_cls, out_step, out_cert


def fast_escape_test(f: ExpAffineMap, z: complex, R: float, budget: int = DEFAULT_BUDGET,
                     samples: int = 4096) -> OrbitOutcome:
    """Compare ``|f^n(z)|`` with the iterated maximum modulus ``M^n(R)``.

    Raises :class:`~escweb.maxmod.InvalidRadius` unless ``M(R) > R``.
    """
    from .maxmod import iterated_max_modulus

    if budget < 1:
        raise ValueError("budget must be >= 1")
    table, horizon_ok = iterated_max_modulus(f, R, budget, samples)
    z = complex(z)
    cl, st, ce = fast_escape_arrays(f, [z.real], [z.imag], table, horizon_ok, budget)
    return _outcome(int(cl[0]), int(st[0]), int(ce[0]))

