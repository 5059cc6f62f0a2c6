"""Maximum modulus M(r) = max_{|z|=r} |f(z)| and the hypothesis checks built on it."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .maps import LOG_FLOAT_MAX, ExpAffineMap, evaluate, is_bergweiler, is_fatou
from .rates import RateKind, RateSequence
from .reports import Report

INV_PHI = (math.sqrt(5) - 1) / 2
DEFAULT_SAMPLES = 4096


class InvalidRadius(ValueError):
    pass


class UnsupportedMap(ValueError):
    pass


@dataclass(frozen=True)
class MaxModEstimate:
    r: float
    value: float
    theta: float

    def as_dict(self) -> dict:
        return {"r": self.r, "value": self.value, "theta": self.theta}


def golden_section_max(g, lo: float, hi: float, tol: float = 1e-12, max_iter: int = 200):
    """Maximise ``g`` on ``[lo, hi]``; returns ``(argmax, max)``.

    Assumes ``g`` is unimodal on the bracket, which holds once the bracket
    is a single sampling cell around a sampled local maximum.
    """
    a, b = lo, hi
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    gc, gd = g(c), g(d)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if gc > gd:
            b, d, gd = d, c, gc
            c = b - INV_PHI * (b - a)
            gc = g(c)
        else:
            a, c, gc = c, d, gd
            d = a + INV_PHI * (b - a)
            gd = g(d)
    return (c, gc) if gc > gd else (d, gd)


def _check_radius(f: ExpAffineMap, r: float):
    if not (r > 0) or not math.isfinite(r):
        raise InvalidRadius(f"radius must be positive and finite, got {r!r}")
    if abs(f.d) * r > LOG_FLOAT_MAX:
        raise OverflowError(f"|d|*r = {abs(f.d) * r:.6g} exceeds the binary64 exponent range")


def max_modulus(f: ExpAffineMap, r: float, samples: int = DEFAULT_SAMPLES,
                candidates: int = 4) -> MaxModEstimate:
    """Dense sampling on the circle, then golden-section refinement of the best cells.

    ``|f(r e^{i theta})|`` is not assumed unimodal; the top ``candidates``
    sampled local maxima are each refined and the largest value wins. The
    result is a lower bound of the true ``M(r)``.
    """
    if samples < 16:
        raise ValueError("samples must be >= 16")
    _check_radius(f, r)
    thetas = 2 * math.pi * np.arange(samples) / samples
    z = r * np.exp(1j * thetas)
    vals = np.abs(f.a * z + f.b + f.c * np.exp(f.d * z))

    def g(t):
        return abs(evaluate(f, cmath.rect(r, t)))

    best_theta = float(thetas[int(np.argmax(vals))])
    best = float(vals.max())
    for t, v in ((0.0, g(0.0)), (math.pi, g(math.pi))):
        if v > best:
            best, best_theta = v, t

    is_peak = (vals >= np.roll(vals, 1)) & (vals >= np.roll(vals, -1))
    peaks = np.flatnonzero(is_peak)
    peaks = peaks[np.argsort(-vals[peaks], kind="stable")][:candidates]
    step = 2 * math.pi / samples
    for i in peaks:
        t, v = golden_section_max(g, thetas[i] - step, thetas[i] + step)
        if v > best:
            best, best_theta = v, math.remainder(t, 2 * math.pi)
    return MaxModEstimate(float(r), best, best_theta)


def log_max_modulus_lower(f: ExpAffineMap, r: float) -> float:
    """Lower bound on ``log M(r)`` valid for any ``r`` (no overflow).

    Evaluates at ``z = r*sign(d)`` where ``|exp(d z)| = exp(|d| r)``:
    ``|f(z)| >= |c| e^{|d| r} - a r - |b|``.
    """
    t = abs(f.d) * r
    rest = abs(f.a) * r + abs(f.b)
    frac = rest / abs(f.c) * math.exp(-t) if t < LOG_FLOAT_MAX else 0.0
    if frac >= 1:
        return -math.inf
    return math.log(abs(f.c)) + t + math.log1p(-frac)


def iterated_max_modulus(f: ExpAffineMap, R: float, n_max: int,
                         samples: int = DEFAULT_SAMPLES) -> tuple[np.ndarray, bool]:
    """Table ``[M(R), M^2(R), ...]`` while representable, capped at ``n_max`` entries.

    The second value is True when the table stopped because the next entry
    provably exceeds the binary64 range.
    """
    first = max_modulus(f, R, samples).value
    if not first > R:
        raise InvalidRadius(f"M(R) = {first:.6g} does not exceed R = {R:.6g}")
    table = [first]
    while len(table) < n_max:
        r = table[-1]
        try:
            table.append(max_modulus(f, r, samples).value)
        except OverflowError:
            return np.array(table), log_max_modulus_lower(f, r) > LOG_FLOAT_MAX
    return np.array(table), False


def smallest_escape_radius(f: ExpAffineMap, margin: float = 1.0, r_max: int = 700,
                           samples: int = DEFAULT_SAMPLES) -> int:
    """Smallest positive integer R with M(R) > R + margin."""
    for R in range(1, r_max + 1):
        try:
            if max_modulus(f, R, samples).value > R + margin:
                return R
        except OverflowError:
            break
    raise InvalidRadius("no integer radius with M(R) > R + margin found")


def rate_domination_check(f: ExpAffineMap, rates: RateSequence, N: int,
                          samples: int = DEFAULT_SAMPLES) -> Report:
    """Check ``a_{n+1} <= M(a_n)`` and ``a_n < a_{n+1}`` for ``n = 1..N``."""
    if N < 1:
        raise ValueError("N must be >= 1")
    rows, failures = [], []
    for n in range(1, N + 1):
        an, an1 = rates(n), rates(n + 1)
        try:
            M = max_modulus(f, an, samples).value
            ok = an1 <= M
            row = {"n": n, "a_n": an, "a_n+1": an1, "M(a_n)": M, "log_space": False}
        except OverflowError:
            # M(a_n) is beyond binary64; compare logarithms instead
            logM = log_max_modulus_lower(f, an)
            ok = rates.log(n + 1) <= logM
            row = {"n": n, "a_n": an, "a_n+1": an1, "log M(a_n) >=": logM, "log_space": True}
        row["increasing"] = an1 > an
        row["ok"] = bool(ok and an1 > an)
        rows.append(row)
        if not row["ok"]:
            failures.append(row)
    return Report("rate_domination", not failures,
                  {"map": f.as_dict(), "rates": rates.as_dict(), "N": N, "rows": rows},
                  failures)


def known_cycles(f: ExpAffineMap) -> list[complex]:
    if is_fatou(f):
        return [complex(0, math.pi), complex(0, -math.pi)]
    if is_bergweiler(f):
        return [complex(math.log(2.0), 0)]
    raise UnsupportedMap("periodic points are only tabulated for the two canonical maps")


def cycle_in_disc_check(f: ExpAffineMap, rates: RateSequence, tol: float = 1e-12) -> Report:
    """Fixed points of the canonical maps lie in the disc ``D(0, a_1)`` (hence in every ``D(0, a_n)``)."""
    points = known_cycles(f)
    a1 = rates(1)
    rows, failures = [], []
    for p in points:
        residual = abs(evaluate(f, p) - p)
        row = {"point": p, "residual": residual, "modulus": abs(p), "a_1": a1,
               "fixed": residual < tol, "inside": abs(p) < a1}
        rows.append(row)
        if not (row["fixed"] and row["inside"]):
            failures.append(row)
    notes = []
    if failures and is_fatou(f) and rates.kind is RateKind.ARITHMETIC and rates.m < 6:
        notes.append(
            "disc hypothesis not verified for m < 6 (pi > (1+m)/2); escape sets only grow "
            "as m decreases, so smaller offsets inherit the web from m = 6")
    return Report("cycle_in_disc", not failures,
                  {"map": f.as_dict(), "rates": rates.as_dict(), "points": rows},
                  failures, notes)
