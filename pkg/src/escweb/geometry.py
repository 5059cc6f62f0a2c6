"""Explicit regions around the escape sets and numerical verifiers for them.

Fatou-type regions are parametrised by an offset ``m`` and a level ``k``;
the Bergweiler-type ones use ``m = 0`` and powers of two.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .maps import ExpAffineMap, Family, fatou, is_bergweiler, is_fatou
from .maxmod import UnsupportedMap
from .orbits import DEFAULT_BUDGET, OutcomeClass, certificate_params, classify_arrays
from .rates import RateSequence
from .reports import Report

TWO_PI = 2 * math.pi
BOX_SIDE = 200.0


def _family(family) -> Family:
    family = Family(family)
    if family is Family.OTHER:
        raise UnsupportedMap("regions are defined for fatou-type and bergweiler-type maps only")
    return family


@dataclass(frozen=True)
class RectR:
    """Open rectangle ``{|x| < half_width, |y| < half_height}`` of level ``k``."""

    m: int
    k: int
    family: Family = Family.FATOU

    def __post_init__(self):
        object.__setattr__(self, "family", _family(self.family))
        if self.k < 0 or self.m < 0:
            raise ValueError("m and k must be non-negative")

    @property
    def half_width(self) -> float:
        if self.family is Family.FATOU:
            return float(self.m + self.k)
        return 2.0 ** (self.k + 2)

    @property
    def half_height(self) -> float:
        if self.family is Family.FATOU:
            return 2 * (self.m + self.k) * math.pi
        return 2.0 ** (self.k + 1) * math.pi

    @property
    def disc_radius(self) -> float:
        """Radius of the disc claimed to contain the rectangle."""
        if self.family is Family.FATOU:
            return 3 * math.pi * (self.m + self.k)
        return 2.0 ** (self.k + 3)

    def contains(self, z: complex) -> bool:
        return rect_contains(self, z)

    def as_dict(self) -> dict:
        return {"m": self.m, "k": self.k, "family": self.family.value,
                "half_width": self.half_width, "half_height": self.half_height}


def rect_contains(rect: RectR, z: complex) -> bool:
    z = complex(z)
    return abs(z.real) < rect.half_width and abs(z.imag) < rect.half_height


def rect_in_disc_check(rect: RectR) -> bool:
    """Corner modulus of the rectangle is below the disc radius."""
    if rect.family is Family.FATOU:
        s = rect.m + rect.k
        return s * math.sqrt(1 + 4 * math.pi ** 2) < 3 * math.pi * s
    k = rect.k
    return math.sqrt(4.0 ** (k + 2) + math.pi ** 2 * 4.0 ** (k + 1)) < 2.0 ** (k + 3)


def rect_containment_sweep(k_max: int = 100, m_max: int = 100) -> Report:
    failures = []
    for k in range(k_max + 1):
        if not rect_in_disc_check(RectR(0, k, Family.BERGWEILER)):
            failures.append({"family": "bergweiler-type", "k": k})
        for m in range(1, m_max + 1):
            if not rect_in_disc_check(RectR(m, k, Family.FATOU)):
                failures.append({"family": "fatou-type", "m": m, "k": k})
    return Report("rect_in_disc", not failures,
                  {"k_max": k_max, "m_max": m_max,
                   "checked": (k_max + 1) * (m_max + 1)}, failures)


# ----------------------------------------------------------------------------
# half-strips


@dataclass(frozen=True)
class HalfStrip:
    """Closed half-strip ``{x <= cutoff}`` (fatou-type) or ``{x >= cutoff}``
    (bergweiler-type) between heights ``2*j*pi`` and ``2*(j+1)*pi``.

    ``level`` is the strip level: its cutoff magnitude is ``m + level``
    (fatou-type) or ``2**(level + 2)`` (bergweiler-type).
    """

    level: int
    j: int
    family: Family
    x_cutoff: float

    @property
    def y_low(self) -> float:
        return TWO_PI * self.j

    @property
    def y_high(self) -> float:
        return TWO_PI * (self.j + 1)

    def contains(self, z: complex) -> bool:
        z = complex(z)
        if not (self.y_low <= z.imag <= self.y_high):
            return False
        if self.family is Family.FATOU:
            return z.real <= self.x_cutoff
        return z.real >= self.x_cutoff

    def as_dict(self) -> dict:
        return {"level": self.level, "j": self.j, "family": self.family.value,
                "x_cutoff": self.x_cutoff, "y_low": self.y_low, "y_high": self.y_high}


def strip_row(y: float) -> int:
    """Row index ``j`` with ``2j*pi <= y <= 2(j+1)*pi``; shared edges go to the lower row."""
    return math.ceil(y / TWO_PI) - 1


def strip_for_row(level: int, j: int, m: int, family) -> HalfStrip:
    family = _family(family)
    if family is Family.FATOU:
        s = m + level
        cutoff = -s if -s <= j < s else s
    else:
        s = 2 ** level
        cutoff = 2.0 ** (level + 2) * (1 if -s <= j < s else -1)
    return HalfStrip(level, j, family, float(cutoff))


def strip_at_level(z: complex, level: int, m: int, family) -> HalfStrip | None:
    z = complex(z)
    strip = strip_for_row(level, strip_row(z.imag), m, family)
    return strip if strip.contains(z) else None


def half_strip_of(z: complex, k: int, m: int, family=Family.FATOU) -> HalfStrip | None:
    """Half-strip one level above ``k`` (cutoff ``m+k+1``) containing ``z``, or None."""
    return strip_at_level(z, k + 1, m, family)


def in_absorbing_half_plane(z: complex, k: int, m: int, family) -> bool:
    family = _family(family)
    z = complex(z)
    if family is Family.FATOU:
        return z.real >= m + k + 1
    return z.real <= -(2.0 ** (k + 3))


def strip_coverage_check(k: int, m: int, family=Family.FATOU, samples: int = 100_000,
                         seed: int = 0, boundary_tol: float = 1e-9) -> Report:
    """Points outside ``R_{k+1}`` lie in the absorbing half-plane xor in exactly one strip."""
    family = _family(family)
    rect = RectR(m, k + 1, family)
    rng = np.random.default_rng(seed)
    pts = np.empty((0, 2))
    while len(pts) < samples:
        batch = rng.uniform(-BOX_SIDE / 2, BOX_SIDE / 2, size=(2 * samples, 2))
        outside = ~((np.abs(batch[:, 0]) < rect.half_width) &
                    (np.abs(batch[:, 1]) < rect.half_height))
        pts = np.concatenate([pts, batch[outside]])
    pts = pts[:samples]
    level = k + 1
    x, y = pts[:, 0], pts[:, 1]
    s = (m + level) if family is Family.FATOU else 2 ** level
    cut = abs(strip_for_row(level, 0, m, family).x_cutoff)
    frac = y / TWO_PI
    on_line = (np.abs(np.abs(x) - cut) < boundary_tol) | (np.abs(frac - np.round(frac)) * TWO_PI
                                                          < boundary_tol)
    x, y = x[~on_line], y[~on_line]
    if family is Family.FATOU:
        hp = x >= m + k + 1
    else:
        hp = x <= -(2.0 ** (k + 3))
    # membership in the row of y and in both neighbours, to detect overlaps
    row = np.ceil(y / TWO_PI) - 1
    hits = np.zeros(x.shape, np.int64)
    for dj in (-1, 0, 1):
        j = row + dj
        inside_y = (TWO_PI * j <= y) & (y <= TWO_PI * (j + 1))
        near = (-s <= j) & (j < s)
        if family is Family.FATOU:
            in_x = np.where(near, x <= -cut, x <= cut)
        else:
            in_x = np.where(near, x >= cut, x >= -cut)
        hits += inside_y & in_x
    bad = np.flatnonzero((hp == (hits > 0)) | (hits > 1))
    exceptions = [{"z": complex(x[i], y[i]), "half_plane": bool(hp[i]), "strips": int(hits[i])}
                  for i in bad]
    on_boundary = int(on_line.sum())
    counts = {"half_plane": int(hp.sum()), "strip": int((~hp).sum())}
    return Report("strip_coverage", not exceptions,
                  {"k": k, "m": m, "family": family.value, "samples": samples, "seed": seed,
                   "skipped_on_boundary": on_boundary, **counts},
                  exceptions[:50])


# ----------------------------------------------------------------------------
# absorbing set families


def absorbing_set_samples(f: ExpAffineMap, m: int, per_set: int, seed: int = 0) -> dict:
    """Sample points on the three set families known to lie in the escape set.

    Returns ``{"half_plane": z[], "half_lines": z[], "lines": z[]}``; the line
    family is truncated to ``|j| <= threshold + 5``.
    """
    if per_set < 1:
        raise ValueError("per_set must be >= 1")
    rng = np.random.default_rng(seed)
    half = BOX_SIDE / 2
    if is_fatou(f):
        if m < 1:
            raise ValueError("fatou-type families need m >= 1")
        edge, jcap, sign = float(m), m, 1
    elif is_bergweiler(f):
        edge, jcap, sign = 2.0 ** (m + 2), 2 ** m, -1
    else:
        raise UnsupportedMap("set families are tabulated for the two canonical maps")
    # half-plane on the side the orbit drifts to: x >= edge (fatou) or x <= -edge
    xs = sign * rng.uniform(edge, edge + BOX_SIDE, per_set)
    hp = xs + 1j * rng.uniform(-half, half, per_set)
    # half-lines at y = 2j*pi, |j| < jcap, on the opposite side
    js = rng.integers(-(jcap - 1), jcap, per_set)
    xs = -sign * rng.uniform(edge, edge + BOX_SIDE, per_set)
    hl = xs + 1j * TWO_PI * js
    # full lines with jcap <= |j| <= jcap + 5
    js = rng.integers(jcap, jcap + 6, per_set) * rng.choice([-1, 1], per_set)
    ln = rng.uniform(-half, half, per_set) + 1j * TWO_PI * js
    return {"half_plane": hp, "half_lines": hl, "lines": ln}


def verify_absorbing_sets(f: ExpAffineMap, m: int, per_set: int = 100,
                          budget: int = DEFAULT_BUDGET, seed: int = 0,
                          rates: RateSequence | None = None) -> Report:
    """Classify samples from each set family; any VIOLATED outcome fails the check.

    ``details["all_member"]`` is the stricter statement that every sample was
    certified (no budget or range exhaustion either).
    """
    if rates is None:
        rates = RateSequence.arithmetic(m) if is_fatou(f) else RateSequence.geometric(m)
    sets = absorbing_set_samples(f, m, per_set, seed)
    params = certificate_params(f, rates)
    failures, per_family = [], {}
    all_member = True
    for name, pts in sets.items():
        cl, st, ce = classify_arrays(f, rates, pts.real, pts.imag, budget, params)
        tally = {c.name: int(np.sum(cl == c)) for c in OutcomeClass}
        per_family[name] = tally
        all_member &= tally["MEMBER"] == len(pts)
        for z, c, s in zip(pts, cl, st):
            if c == OutcomeClass.VIOLATED:
                failures.append({"family": name, "z": complex(z), "step": int(s)})
    details = {"map": f.as_dict(), "rates": rates.as_dict(), "m": m, "per_set": per_set,
               "budget": budget, "seed": seed, "outcomes": per_family,
               "all_member": bool(all_member)}
    if is_fatou(f):
        # first image of each half-line point lands in the half-plane Re >= m + 1
        hl = sets["half_lines"]
        re_img = hl.real + 1 + np.exp(-hl.real) * np.cos(hl.imag)
        details["half_line_first_image_min_re"] = float(re_img.min())
        if not np.all(re_img >= m + 1):
            failures.append({"family": "half_lines", "reason": "first image left of m+1"})
    return Report("absorbing_sets", not failures, details, failures)


# ----------------------------------------------------------------------------
# modulus bounds


def modulus_bound_samples(f: ExpAffineMap, samples: int, seed: int = 0) -> np.ndarray:
    """Random points satisfying the modulus-bound precondition of the canonical map."""
    rng = np.random.default_rng(seed)
    if is_fatou(f):
        lo, sign = 3.0, -1.0
    elif is_bergweiler(f):
        lo, sign = 4.0, 1.0
    else:
        raise UnsupportedMap("modulus bounds are stated for the two canonical maps")
    out = np.empty(0, dtype=np.complex128)
    while out.size < samples:
        n = 2 * (samples - out.size) + 16
        # t = sign*Re z in [lo, lo + 200], |z| <= 2t; exponent t <= 700
        t = rng.uniform(lo, lo + BOX_SIDE, n)
        y = rng.uniform(-BOX_SIDE / 2, BOX_SIDE / 2, n)
        z = sign * t + 1j * y
        keep = np.abs(z) <= 2 * t
        out = np.concatenate([out, z[keep]])
    return out[:samples]


def verify_modulus_bounds(f: ExpAffineMap, samples: int = 1_000_000, seed: int = 0,
                          rel_slack: float = 1e-12) -> Report:
    """Check ``exp(t)/2 <= |f(z)| <= 2 exp(t)`` with ``t = -Re z`` (fatou) or ``Re z``."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    z = modulus_bound_samples(f, samples, seed)
    t = -z.real if is_fatou(f) else z.real
    mod = np.abs(f.a * z + f.b + f.c * np.exp(f.d * z))
    e = np.exp(t)
    low_ok = mod >= 0.5 * e * (1 - rel_slack)
    high_ok = mod <= 2 * e * (1 + rel_slack)
    bad = np.flatnonzero(~(low_ok & high_ok))
    failures = [{"z": complex(z[i]), "modulus": float(mod[i]), "exp_t": float(e[i])}
                for i in bad[:50]]
    ratio = mod / e
    return Report("modulus_bounds", bad.size == 0,
                  {"map": f.as_dict(), "samples": int(samples), "seed": seed,
                   "violations": int(bad.size), "min_ratio": float(ratio.min()),
                   "max_ratio": float(ratio.max()), "rel_slack": rel_slack},
                  failures)


def default_rect0(m: int) -> RectR:
    return RectR(m, 0, fatou().family)
