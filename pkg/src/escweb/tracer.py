"""Curve tracking: push a horizontal segment through ``f`` level by level.

Level ``k`` is a polyline ``gamma_k`` inside the image ``f^k(gamma_0)``. Every
point carries its parameter on ``gamma_0``, so the chosen subcurves give a
chain of nested parameter intervals and a point ``zeta`` whose orbit visits
each level.

Let ``u = -Re z`` for fatou-type maps and ``u = Re z`` for bergweiler-type
maps. A level with anchor ``u_k`` satisfies

(a) ``u_k > 3(m+k+1)`` (fatou) or ``u_k > 2**(k+2)`` (bergweiler);
(b) the far end sits at ``u_k + 10``;
(c) all points have ``u`` in ``[u_k, u_k + 10]`` and lie in one half-strip of level ``k``;
(d) ``u >= |z|/2`` at every point.

Once the images leave the binary64 range the next level is handled in the
log domain: only ``log u`` and the image argument are formed, which is
enough to check the four conditions, but such a level cannot be pushed again.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import strip_at_level, strip_row
from .maps import LOG_FLOAT_MAX, ExpAffineMap, Family, arg_image, log_modulus
from .maxmod import UnsupportedMap

E10 = math.exp(10.0)
BAND = 10.0
SUBDIVISION_CAP = 2 ** 20
LEVEL_SPACING = 1.0


class TraceError(RuntimeError):
    """Base class; ``partial`` holds the levels completed before the failure."""

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


class PreconditionError(TraceError):
    pass


class RangeError(TraceError):
    pass


class SubdivisionCapExceeded(TraceError):
    pass


class SelectionFailure(TraceError):
    pass


# ----------------------------------------------------------------------------
# family-dependent constants


def _sigma(f: ExpAffineMap) -> float:
    fam = f.family
    if fam is Family.FATOU:
        return -1.0
    if fam is Family.BERGWEILER:
        return 1.0
    raise UnsupportedMap("the tracer handles fatou-type and bergweiler-type maps")


def anchor_bound(f: ExpAffineMap, m: int, k: int) -> float:
    """Condition (a): the anchor ``u_k`` must exceed this."""
    if f.family is Family.FATOU:
        return 3.0 * (m + k + 1)
    return 2.0 ** (k + 2)


def image_gate(f: ExpAffineMap, m: int, k: int) -> float:
    """Images of level ``k`` must have modulus above this to clear the next rectangle."""
    if f.family is Family.FATOU:
        return 3 * (m + k + 1) * math.pi
    return 2.0 ** (k + 4)


def growth_bound(f: ExpAffineMap, m: int, k: int) -> float:
    """Lower bound claimed for ``|f^k(zeta)|``."""
    if f.family is Family.FATOU:
        return 3 * (k + m) * math.pi
    return 4.0 if k == 0 else 2.0 ** (k + 3)


def default_a0(f: ExpAffineMap, m: int) -> float:
    if f.family is Family.FATOU:
        return -3.0 * (m + 1) - 1.0
    return 5.0


# ----------------------------------------------------------------------------
# data


@dataclass
class TracedCurve:
    """Polyline in ``f^level(gamma_0)``, ordered by increasing parameter.

    ``anchor_first`` tells whether the anchor point (``u = u_k``) is at the
    low-parameter end.
    """

    points: np.ndarray
    params: np.ndarray
    level: int
    a_k: float
    strip_index: int | None
    origin: tuple
    anchor_first: bool = True
    checks: dict = field(default_factory=dict)
    # the level lies on the line y = line_q*pi/|d| (exactly, not just to rounding)
    line_q: float | None = None

    @property
    def interval(self) -> tuple[float, float]:
        return float(self.params[0]), float(self.params[-1])

    @property
    def anchor(self) -> complex:
        return complex(self.points[0] if self.anchor_first else self.points[-1])

    @property
    def far_end(self) -> complex:
        return complex(self.points[-1] if self.anchor_first else self.points[0])

    def as_dict(self) -> dict:
        return {"level": self.level, "a_k": self.a_k, "strip_index": self.strip_index,
                "interval": list(self.interval), "n_points": int(len(self.points)),
                "anchor": self.anchor, "far_end": self.far_end, "checks": self.checks}


@dataclass
class LogLevel:
    """A level whose points are beyond binary64: ``u = exp(log_u)``."""

    level: int
    log_u: float
    center: float
    log_width: float
    strip_index: int | None
    checks: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"level": self.level, "log_u": self.log_u, "center": self.center,
                "log_width": self.log_width, "strip_index": self.strip_index,
                "checks": self.checks}


@dataclass
class NestedIntervals:
    """Parameter intervals on ``gamma_0``; log-domain levels store a centre and ``log(width)``."""

    intervals: list = field(default_factory=list)
    log_widths: list = field(default_factory=list)

    def add(self, s: float, t: float):
        self.intervals.append((float(s), float(t)))
        self.log_widths.append(math.log(t - s) if t > s else -math.inf)

    def add_log(self, center: float, log_width: float):
        self.intervals.append((float(center), float(center)))
        self.log_widths.append(float(log_width))

    def is_nested(self) -> bool:
        for (s0, t0), (s1, t1) in zip(self.intervals, self.intervals[1:]):
            if not (s0 <= s1 <= t1 <= t0):
                return False
        return True

    def strictly_shrinking(self) -> bool:
        return all(b < a for a, b in zip(self.log_widths, self.log_widths[1:]))

    def as_dict(self) -> dict:
        return {"intervals": [list(i) for i in self.intervals], "log_widths": self.log_widths,
                "nested": self.is_nested(), "strictly_shrinking": self.strictly_shrinking()}


# ----------------------------------------------------------------------------
# evaluation helpers


def _gamma0(origin, p):
    start, end = origin
    return start + np.asarray(p, dtype=np.float64) * (end - start)


def _iterate(f: ExpAffineMap, z, n: int):
    """``f^n`` on an array; raises OverflowError when the exponential leaves the range."""
    z = np.asarray(z, dtype=np.complex128)
    for _ in range(n):
        if np.any(f.d * z.real > LOG_FLOAT_MAX):
            raise OverflowError("exponential term exceeds binary64")
        z = f.a * z + f.b + f.c * np.exp(f.d * z)
    return z


def orbit_at(f: ExpAffineMap, origin, p, n: int):
    return _iterate(f, _gamma0(origin, p), n)


def _check_conditions(f, m, k, points, u_k, strip, sigma, tol=1e-9, line_y=None) -> dict:
    u = sigma * points.real
    bound = anchor_bound(f, m, k)
    if line_y is not None:
        # the level lies on an invariant line; its float imaginary part is rounding noise
        points = points.real + 1j * line_y
    rows = {strip_row(z.imag) for z in points}
    in_strip = strip is not None and all(strip_at_level(z, k, m, f.family) is not None
                                         and strip_row(z.imag) == strip for z in points)
    scale = tol * max(1.0, abs(u_k))
    return {
        "a": bool(u_k > bound),
        "a_bound": bound,
        "b": bool(abs(u.max() - (u_k + BAND)) <= scale + 1e-6 * BAND),
        "c_band": bool(u.min() >= u_k - scale and u.max() <= u_k + BAND + scale),
        "c_strip": bool(in_strip and len(rows) == 1),
        "d": bool(np.all(u >= np.abs(points) / 2)),
    }


def _all_ok(checks: dict) -> bool:
    return all(v for k, v in checks.items() if k in ("a", "b", "c_band", "c_strip", "d"))


# ----------------------------------------------------------------------------
# construction


def construct_initial_curve(f: ExpAffineMap, m: int, j0: int, a0: float,
                            step: float = 0.1) -> TracedCurve:
    """Horizontal segment at height ``(2*j0+1)*pi`` from ``u = u_0`` to ``u_0 + 10``.

    For fatou-type maps it runs from ``a0`` to ``a0 - 10``; for bergweiler-type
    from ``a0`` to ``a0 + 10``.
    """
    if not step > 0:
        raise ValueError("step must be positive")
    sigma = _sigma(f)
    y0 = (2 * j0 + 1) * math.pi
    start = complex(a0, y0)
    end = complex(a0 + sigma * BAND, y0)
    n = max(1, math.ceil(BAND / step))
    params = np.linspace(0.0, 1.0, n + 1)
    points = _gamma0((start, end), params)
    strip = strip_row(y0)
    checks = _check_conditions(f, m, 0, points, sigma * a0, strip, sigma, line_y=y0)
    if not _all_ok(checks):
        failed = [k for k in ("a", "c_strip", "d") if not checks[k]]
        raise PreconditionError(f"initial segment fails condition(s) {failed}")
    q = float((2 * j0 + 1) * abs(f.d)) if float(abs(f.d)).is_integer() else None
    return TracedCurve(points, params, 0, float(a0), strip, (start, end), True, checks, q)


@dataclass
class ImageCurve:
    points: np.ndarray
    params: np.ndarray
    level: int
    origin: tuple
    max_spacing: float
    segments: int


def push_curve(f: ExpAffineMap, curve: TracedCurve, max_spacing: float | None = None,
               cap: int = SUBDIVISION_CAP) -> ImageCurve:
    """Image of ``curve`` under ``f``, refined until consecutive image points are
    at most ``max_spacing`` apart (default: a tenth of the endpoint distance).

    New points are computed from their ``gamma_0`` parameter, so the polyline
    samples the exact image rather than an interpolation.
    """
    level = curve.level + 1
    params = np.array(curve.params, dtype=np.float64)
    try:
        pts = orbit_at(f, curve.origin, params, level)
    except OverflowError as exc:
        raise RangeError(f"level {level} images exceed binary64: {exc}") from None
    if len(params) == 1:
        return ImageCurve(pts, params, level, curve.origin, 0.0, 0)
    if max_spacing is None:
        max_spacing = 0.1 * abs(pts[-1] - pts[0]) or 1.0
    while True:
        gaps = np.abs(np.diff(pts))
        wide = np.flatnonzero(gaps > max_spacing)
        if wide.size == 0:
            break
        if len(params) - 1 + wide.size > cap:
            raise SubdivisionCapExceeded(f"more than {cap} segments needed at level {level}")
        mids = 0.5 * (params[wide] + params[wide + 1])
        # a segment that can no longer be split in floating point is left as is
        fresh = (mids > params[wide]) & (mids < params[wide + 1])
        if not np.any(fresh):
            break
        mids = mids[fresh]
        try:
            new_pts = orbit_at(f, curve.origin, mids, level)
        except OverflowError as exc:
            raise RangeError(f"level {level} images exceed binary64: {exc}") from None
        order = np.argsort(np.concatenate([params, mids]), kind="stable")
        params = np.concatenate([params, mids])[order]
        pts = np.concatenate([pts, new_pts])[order]
    return ImageCurve(pts, params, level, curve.origin, float(max_spacing), len(params) - 1)


# ----------------------------------------------------------------------------
# selection


def _bisect_param(g, lo: float, hi: float, iters: int = 200) -> float:
    """Root of ``g`` on ``[lo, hi]`` given a sign change, to parameter resolution."""
    glo = g(lo)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if not (lo < mid < hi):
            break
        gm = g(mid)
        if (gm > 0) == (glo > 0):
            lo, glo = mid, gm
        else:
            hi = mid
    return 0.5 * (lo + hi) if lo < 0.5 * (lo + hi) < hi else lo


def _refine_between(f, origin, level, p_lo, p_hi, spacing, cap):
    params = np.array([p_lo, p_hi])
    pts = orbit_at(f, origin, params, level)
    while True:
        wide = np.flatnonzero(np.abs(np.diff(pts)) > spacing)
        if wide.size == 0:
            return params, pts
        if len(params) + wide.size > cap:
            raise SubdivisionCapExceeded("subcurve refinement exceeded the cap")
        mids = 0.5 * (params[wide] + params[wide + 1])
        fresh = (mids > params[wide]) & (mids < params[wide + 1])
        if not np.any(fresh):
            return params, pts
        mids = mids[fresh]
        order = np.argsort(np.concatenate([params, mids]), kind="stable")
        params = np.concatenate([params, mids])[order]
        pts = np.concatenate([pts, orbit_at(f, origin, mids, level)])[order]


def endpoint_checks(f: ExpAffineMap, m: int, curve: TracedCurve, image_anchor: complex,
                    image_far: complex, image_min_mod: float) -> dict:
    """Image gate and endpoint ratio for a float level."""
    sigma = _sigma(f)
    u_k = sigma * curve.a_k
    gate = image_gate(f, m, curve.level)
    floor = math.exp(u_k) / 2
    ratio = abs(image_far) / abs(image_anchor)
    return {"image_floor": floor, "image_gate": gate,
            "gate_ok": bool(floor > gate and image_min_mod >= floor * (1 - 1e-12)),
            "endpoint_ratio": ratio, "endpoint_ratio_ok": bool(ratio >= E10 / 4)}


def select_subcurve(f: ExpAffineMap, image: ImageCurve, curve: TracedCurve, m: int,
                    spacing: float = LEVEL_SPACING, cap: int = SUBDIVISION_CAP) -> TracedCurve:
    """Pick ``gamma_{k+1}`` inside ``f(gamma_k)`` among points with
    ``|w| >= e^10/8 |f(anchor_k)|``.

    The new anchor is one unit inside the qualifying point nearest the axis
    (largest real part for fatou-type maps, smallest for bergweiler-type).
    """
    sigma = _sigma(f)
    k = curve.level
    w, p = image.points, image.params
    anchor_img = orbit_at(f, curve.origin, [curve.params[0] if curve.anchor_first
                                            else curve.params[-1]], k + 1)[0]
    far_img = orbit_at(f, curve.origin, [curve.params[-1] if curve.anchor_first
                                         else curve.params[0]], k + 1)[0]
    ends = endpoint_checks(f, m, curve, anchor_img, far_img, float(np.abs(w).min()))
    if not ends["gate_ok"]:
        raise SelectionFailure(f"level {k}: image gate fails {ends}")
    threshold = E10 / 8 * abs(anchor_img)
    u = sigma * w.real
    qual = np.abs(w) >= threshold
    if not np.any(qual):
        raise SelectionFailure(f"level {k}: no image point reaches the selection threshold")
    u_next = float(u[qual].min()) + 1.0
    if not u_next > anchor_bound(f, m, k + 1):
        raise SelectionFailure(
            f"level {k + 1}: anchor u={u_next:.6g} violates condition (a) "
            f"(needs > {anchor_bound(f, m, k + 1):.6g})")
    target_lo, target_hi = u_next, u_next + BAND

    def g(pp, target):
        return sigma * orbit_at(f, image.origin, [pp], k + 1)[0].real - target

    # scan for an entry into the band followed by the far crossing without leaving
    chosen = None
    n = len(p)
    i = 0
    while i < n - 1 and chosen is None:
        if (u[i] - target_lo) * (u[i + 1] - target_lo) <= 0 and u[i] != u[i + 1]:
            rising = u[i + 1] > u[i]
            p_in = _bisect_param(lambda q: g(q, target_lo), p[i], p[i + 1])
            j = i if rising else i + 1
            step = 1 if rising else -1
            # walk in the direction of increasing u until the far edge
            jj = j
            while 0 <= jj + step < n:
                a, b = u[jj], u[jj + step]
                if b < target_lo:
                    break
                if (a - target_hi) * (b - target_hi) <= 0 and a != b:
                    lo_p, hi_p = sorted((p[jj], p[jj + step]))
                    p_out = _bisect_param(lambda q: g(q, target_hi), lo_p, hi_p)
                    chosen = (p_in, p_out)
                    break
                jj += step
        i += 1
    if chosen is None:
        raise SelectionFailure(f"level {k + 1}: no band crossing pair at this resolution")
    p_in, p_out = chosen
    lo, hi = sorted((p_in, p_out))
    if not hi > lo:
        raise RangeError(f"level {k + 1}: parameter interval is below binary64 resolution")
    params, pts = _refine_between(f, image.origin, k + 1, lo, hi, spacing, cap)
    if len(params) < 3 or np.any(np.abs(np.diff(pts)) > spacing):
        # refinement ran out of representable parameters before resolving the band
        raise RangeError(f"level {k + 1}: subcurve is not resolvable at binary64 "
                         f"parameter resolution")
    anchor_first = p_in <= p_out
    if not np.all(np.abs(pts) >= threshold * (1 - 1e-12)):
        raise SelectionFailure(f"level {k + 1}: subcurve dips below the selection threshold")
    line_q = _image_line(f, curve.line_q)
    line_y = None if line_q is None else line_q * math.pi / abs(f.d)
    strip = strip_row(pts[0].imag if line_y is None else line_y)
    checks = _check_conditions(f, m, k + 1, pts, target_lo, strip, sigma, line_y=line_y)
    checks["selection_threshold"] = threshold
    if not _all_ok(checks):
        raise SelectionFailure(f"level {k + 1}: conditions fail {checks}")
    curve.checks.update(ends)
    return TracedCurve(pts, params, k + 1, sigma * target_lo, strip, image.origin,
                       anchor_first, checks, line_q)


# ----------------------------------------------------------------------------
# log-domain continuation


def _image_line(f: ExpAffineMap, q: float | None) -> float | None:
    """Image of the line ``y = q*pi/|d|``: when ``q`` is an integer, ``sin(d*y) = 0``
    and ``f`` maps the line onto ``y = a*q*pi/|d|``."""
    if q is None or not float(q).is_integer():
        return None
    return f.a * q


def continue_in_log_domain(f: ExpAffineMap, curve: TracedCurve, m: int) -> LogLevel:
    """Certify the next level without forming its points.

    Works on ``log|f|`` and ``arg f`` of the current level, locates the
    parameter where the image modulus crosses the selection threshold, and
    checks conditions (a)-(d) of the next level from there.
    """
    sigma = _sigma(f)
    k = curve.level
    pts, params = curve.points, curve.params
    logs = np.array([log_modulus(f, z) for z in pts])
    args = np.array([arg_image(f, z) for z in pts])
    u_k = sigma * curve.a_k
    log_gate = math.log(image_gate(f, m, k))
    log_floor = u_k - math.log(2.0)
    anchor_i = 0 if curve.anchor_first else len(pts) - 1
    far_i = len(pts) - 1 - anchor_i
    checks = {
        "log_image_floor": log_floor,
        "gate_ok": bool(log_floor > log_gate and logs.min() >= log_floor - 1e-12 * abs(log_floor)),
        "log_endpoint_ratio": float(logs[far_i] - logs[anchor_i]),
    }
    checks["endpoint_ratio_ok"] = bool(checks["log_endpoint_ratio"] >= 10 - math.log(4))
    curve.checks.update({k_: checks[k_] for k_ in ("gate_ok", "endpoint_ratio_ok")})
    if not checks["gate_ok"]:
        raise SelectionFailure(f"level {k}: image gate fails in log domain", None)
    log_thr = 10 - math.log(8) + logs[anchor_i]

    def h(pp):
        z = orbit_at(f, curve.origin, [pp], k)[0]
        return log_modulus(f, z) - log_thr

    # first polyline segment (walking from the anchor) where log|f| reaches the threshold
    order = range(len(pts)) if curve.anchor_first else range(len(pts) - 1, -1, -1)
    order = list(order)
    idx = next((i for i in order if logs[i] >= log_thr), None)
    if idx is None:
        raise SelectionFailure(f"level {k + 1}: no image point reaches the selection threshold")
    if idx == order[0]:
        center = float(params[idx])
    else:
        prev = order[order.index(idx) - 1]
        lo, hi = sorted((params[prev], params[idx]))
        center = _bisect_param(h, float(lo), float(hi))
    z_c = orbit_at(f, curve.origin, [center], k)[0]
    cos_c = math.cos(arg_image(f, z_c))
    beyond = [i for i in order[order.index(idx):]]
    dir_cos = sigma * np.cos(args[beyond])
    d_ok = bool(sigma * cos_c >= 0.5 and np.all(dir_cos >= 0.5))
    checks["min_direction_cos"] = float(min(sigma * cos_c, dir_cos.min()))
    checks["d"] = d_ok
    if not d_ok:
        raise SelectionFailure(
            f"level {k + 1}: images point the wrong way (condition (d) fails, "
            f"sigma*cos(arg) = {checks['min_direction_cos']:.3g} < 1/2)")
    log_u = log_thr + math.log(sigma * cos_c)
    checks["a"] = bool(log_u > math.log(anchor_bound(f, m, k + 1)))
    checks["b"] = True  # the far end is placed at u + 10 by construction
    checks["c_band"] = True
    q_img = _image_line(f, curve.line_q)
    row = None if q_img is None else strip_row(q_img * math.pi / abs(f.d))
    checks["c_strip"] = row is not None
    checks["strip_note"] = ("row carried exactly by an invariant horizontal line" if row is not None
                            else "imaginary part below binary64 phase resolution; row unresolved")
    # next-level gate: exp(u)/2 against the next rectangle
    u_val = math.exp(log_u) if log_u < LOG_FLOAT_MAX else math.inf
    checks["next_gate_ok"] = bool(u_val - math.log(2) > math.log(image_gate(f, m, k + 1)))
    # width of the next parameter interval from the local slope of u along this level
    i0 = max(0, min(len(params) - 2, int(np.searchsorted(params, center)) - 1))
    dp = params[i0 + 1] - params[i0]
    du = abs(sigma * (pts[i0 + 1].real - pts[i0].real) / dp) if dp > 0 else 0.0
    if not du > 0:
        raise RangeError(f"level {k + 1}: parameter slope below binary64 resolution")
    log_width = math.log(BAND) - log_u - math.log(du)
    checks["log_width_estimate"] = log_width
    if not checks["a"]:
        raise SelectionFailure(f"level {k + 1}: anchor violates condition (a) in log domain")
    return LogLevel(k + 1, float(log_u), center, float(log_width), row, checks)


# ----------------------------------------------------------------------------
# driver


@dataclass
class TraceResult:
    zeta: complex | None
    intervals: NestedIntervals
    levels: list
    growth: list
    error: str | None = None
    error_type: str | None = None

    @property
    def completed_levels(self) -> int:
        return len(self.levels) - 1

    @property
    def passed(self) -> bool:
        conds = all(_all_ok(lv.checks) for lv in self.levels)
        ends = all(lv.checks.get("gate_ok", True) and lv.checks.get("endpoint_ratio_ok", True)
                   for lv in self.levels)
        # escape thresholds start at n = 1; the k = 0 row is informational
        grow = all(g["ok"] for g in self.growth if g["k"] >= 1)
        return (self.error is None and conds and ends and grow
                and self.intervals.is_nested() and self.intervals.strictly_shrinking())

    def as_dict(self) -> dict:
        return {"zeta": self.zeta, "levels": [lv.as_dict() for lv in self.levels],
                "intervals": self.intervals.as_dict(), "growth": self.growth,
                "error": self.error, "error_type": self.error_type, "passed": self.passed}


def _point_to_polyline(z: complex, pts: np.ndarray) -> float:
    if len(pts) == 1:
        return abs(z - pts[0])
    a, b = pts[:-1], pts[1:]
    ab = b - a
    denom = np.abs(ab) ** 2
    t = np.clip(np.where(denom > 0, ((z - a) * np.conj(ab)).real / np.where(denom > 0, denom, 1), 0), 0, 1)
    return float(np.min(np.abs(a + t * ab - z)))


def _growth_report(f, m, zeta_param, origin, levels) -> list:
    rows = []
    prev = None
    z = complex(_gamma0(origin, zeta_param))
    for lv in levels:
        k = lv.level
        bound = growth_bound(f, m, k)
        if isinstance(lv, LogLevel):
            # f^k(zeta) is out of range; its log-modulus comes from f^(k-1)(zeta)
            logmod = log_modulus(f, prev)
            rows.append({"k": k, "log_modulus": logmod, "bound": bound,
                         "ok": bool(logmod > math.log(bound))})
            break
        mod = abs(z)
        dist = _point_to_polyline(z, lv.points)
        rows.append({"k": k, "modulus": mod, "bound": bound, "ok": bool(mod > bound),
                     "distance_to_level": dist,
                     "near_level": bool(dist <= max(LEVEL_SPACING, 1e-9 * mod))})
        prev = z
        try:
            z = complex(_iterate(f, z, 1)[()])
        except OverflowError:
            z = None
    return rows


def trace(f: ExpAffineMap, m: int, j0: int = 0, a0: float | None = None, K: int = 2,
          step: float = 0.1, raise_on_error: bool = True) -> TraceResult:
    """Run ``K`` levels of the construction starting from the midline segment of row ``j0``.

    Returns the point ``zeta`` on ``gamma_0``, the nested parameter intervals,
    the levels and the growth checks ``|f^k(zeta)| > bound(k)``. On failure a
    :class:`TraceError` is raised whose ``partial`` attribute holds the
    result up to the last completed level (or, with ``raise_on_error=False``,
    that result is returned with ``error`` set).
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    if a0 is None:
        a0 = default_a0(f, m)
    curve = construct_initial_curve(f, m, j0, a0, step)
    levels = [curve]
    nested = NestedIntervals()
    nested.add(*curve.interval)
    error = None
    for _ in range(K):
        last = levels[-1]
        try:
            if isinstance(last, LogLevel):
                raise RangeError(
                    f"level {last.level + 1} needs exp(exp({last.log_u:.6g})), beyond binary64")
            try:
                image = push_curve(f, last)
            except RangeError:
                lv = continue_in_log_domain(f, last, m)
                levels.append(lv)
                nested.add_log(lv.center, lv.log_width)
                continue
            nxt = select_subcurve(f, image, last, m)
            levels.append(nxt)
            nested.add(*nxt.interval)
        except TraceError as exc:
            error = exc
            break
    final = levels[-1]
    if isinstance(final, LogLevel):
        zeta_param = final.center
    else:
        s, t = final.interval
        zeta_param = 0.5 * (s + t)
    if not isinstance(final, LogLevel) and error is None and len(levels) > 1:
        # close out the last float level: record its image gate and endpoint ratio
        try:
            a_img = orbit_at(f, final.origin, [final.params[0] if final.anchor_first
                                               else final.params[-1]], final.level + 1)[0]
            f_img = orbit_at(f, final.origin, [final.params[-1] if final.anchor_first
                                               else final.params[0]], final.level + 1)[0]
            mins = float(np.abs(orbit_at(f, final.origin, final.params, final.level + 1)).min())
            final.checks.update(endpoint_checks(f, m, final, a_img, f_img, mins))
        except OverflowError:
            log_a = log_modulus(f, final.anchor)
            log_f = log_modulus(f, final.far_end)
            final.checks["endpoint_ratio_ok"] = bool(log_f - log_a >= 10 - math.log(4))
            final.checks["gate_ok"] = bool(_sigma(f) * final.a_k - math.log(2)
                                           > math.log(image_gate(f, m, final.level)))
    zeta = complex(_gamma0(curve.origin, zeta_param))
    growth = _growth_report(f, m, zeta_param, curve.origin, levels)
    result = TraceResult(zeta, nested, levels, growth)
    if error is not None:
        result.error = str(error)
        result.error_type = type(error).__name__
        if raise_on_error:
            error.partial = result
            raise error
    return result
