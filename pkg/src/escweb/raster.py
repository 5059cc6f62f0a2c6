"""Per-pixel classification over a rectangular window, plus PPM output."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from ._validation import ConfigError, check_int, check_window
from .estimators import _threads
from .maps import ExpAffineMap, bergweiler, fatou
from .maxmod import DEFAULT_SAMPLES, iterated_max_modulus, smallest_escape_radius
from .orbits import DEFAULT_BUDGET, OutcomeClass, classify_arrays, fast_escape_arrays
from .rates import RateSequence
from .reports import to_jsonable

FATOU_WINDOW = (-8.0, 8.0, -12 * math.pi, 12 * math.pi)
BERGWEILER_WINDOW = (-40.0, 40.0, -16 * math.pi, 16 * math.pi)
JULIA_WINDOW = (-8.0, 4.0, -12.0, 12.0)
DEFAULT_SIZE = (800, 800)

DEFAULT_PALETTE = {
    OutcomeClass.VIOLATED: (32, 32, 32),
    OutcomeClass.MEMBER: (255, 255, 255),
    OutcomeClass.BUDGET_EXHAUSTED: (176, 176, 176),
    OutcomeClass.RANGE_EXCEEDED: (200, 48, 48),
}


@dataclass(frozen=True)
class GridSpec:
    """Pixel grid over ``[xmin, xmax] x [ymin, ymax]``.

    Column ``i`` and row ``j`` (row 0 at the top) sample the pixel centre
    ``(xmin + (i + 1/2) dx, ymax - (j + 1/2) dy)``.
    """

    window: tuple
    width: int
    height: int
    f: ExpAffineMap = field(default_factory=fatou)
    rates: RateSequence = field(default_factory=lambda: RateSequence.arithmetic(6))
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        object.__setattr__(self, "window", check_window(self.window))
        object.__setattr__(self, "width", check_int("width", self.width, 1))
        object.__setattr__(self, "height", check_int("height", self.height, 1))
        object.__setattr__(self, "budget", check_int("budget", self.budget, 1))
        if not isinstance(self.f, ExpAffineMap):
            raise ConfigError("f must be an ExpAffineMap")

    @property
    def dx(self) -> float:
        return (self.window[1] - self.window[0]) / self.width

    @property
    def dy(self) -> float:
        return (self.window[3] - self.window[2]) / self.height

    def xs(self) -> np.ndarray:
        return self.window[0] + (np.arange(self.width) + 0.5) * self.dx

    def ys(self) -> np.ndarray:
        return self.window[3] - (np.arange(self.height) + 0.5) * self.dy

    def centers(self) -> tuple[np.ndarray, np.ndarray]:
        """``(X, Y)`` arrays of shape ``(height, width)``."""
        return np.meshgrid(self.xs(), self.ys())

    def to_plane(self, col, row):
        """Plane coordinates of (possibly fractional) pixel-corner coordinates."""
        return (self.window[0] + np.asarray(col) * self.dx,
                self.window[3] - np.asarray(row) * self.dy)

    def as_dict(self) -> dict:
        return {"window": list(self.window), "width": self.width, "height": self.height,
                "map": self.f.as_dict(), "rates": self.rates.as_dict(), "budget": self.budget}


@dataclass
class RegionMask:
    """Outcome class, decision step and certificate for each pixel (row-major, top row first)."""

    spec: GridSpec
    classes: np.ndarray
    steps: np.ndarray
    certs: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        shape = (self.spec.height, self.spec.width)
        for name in ("classes", "steps", "certs"):
            if getattr(self, name).shape != shape:
                raise ValueError(f"{name} must have shape {shape}")

    def counts(self) -> dict:
        return {c.name: int(np.sum(self.classes == c)) for c in OutcomeClass}

    def save(self, path) -> None:
        np.savez_compressed(path, classes=self.classes, steps=self.steps, certs=self.certs,
                            spec=json.dumps(to_jsonable(self.spec.as_dict())),
                            meta=json.dumps(to_jsonable(self.meta)))

    @classmethod
    def load(cls, path) -> "RegionMask":
        with np.load(path) as data:
            spec_d = json.loads(str(data["spec"]))
            mp = spec_d["map"]
            rt = spec_d["rates"]
            spec = GridSpec(tuple(spec_d["window"]), spec_d["width"], spec_d["height"],
                            ExpAffineMap(mp["a"], mp["b"], mp["c"], mp["d"]),
                            RateSequence(rt["kind"], rt["m"]), spec_d["budget"])
            return cls(spec, data["classes"].copy(), data["steps"].copy(),
                       data["certs"].copy(), json.loads(str(data["meta"])))


def _majority(cl, st, ce, shape):
    """Majority vote over the trailing axis of 4 sub-samples; ties go to the lowest class code."""
    cl = cl.reshape(shape + (4,))
    st = st.reshape(shape + (4,))
    ce = ce.reshape(shape + (4,))
    votes = np.stack([(cl == c).sum(axis=-1) for c in OutcomeClass], axis=-1)
    winner = np.argmax(votes, axis=-1).astype(np.int8)
    first = np.argmax(cl == winner[..., None], axis=-1)[..., None]
    return (winner, np.take_along_axis(st, first, -1)[..., 0],
            np.take_along_axis(ce, first, -1)[..., 0])


def _sample_points(spec: GridSpec, supersample: bool):
    X, Y = spec.centers()
    if not supersample:
        return X.ravel(), Y.ravel()
    off = np.array([-0.25, 0.25])
    ox, oy = np.meshgrid(off * spec.dx, off * spec.dy)
    return ((X[..., None] + ox.ravel()).ravel(), (Y[..., None] + oy.ravel()).ravel())


def rasterize(spec: GridSpec, n_jobs: int | None = None, supersample: bool = False) -> RegionMask:
    """Classify every pixel centre against the rate sequence of ``spec``.

    With ``supersample`` each pixel takes the majority class over a 2x2
    sub-grid at quarter-pixel offsets.
    """
    xs, ys = _sample_points(spec, supersample)
    with _threads(n_jobs):
        cl, st, ce = classify_arrays(spec.f, spec.rates, xs, ys, spec.budget)
    shape = (spec.height, spec.width)
    if supersample:
        cl, st, ce = _majority(cl, st, ce, shape)
    return RegionMask(spec, cl.reshape(shape), st.reshape(shape), ce.reshape(shape),
                      {"kind": "uniform-escape", "supersample": supersample})


def render_julia_approx(spec: GridSpec, R: float | None = None, n_jobs: int | None = None,
                        samples: int = DEFAULT_SAMPLES) -> RegionMask:
    """Fast-escape mask: members satisfy ``|f^n(z)| >= M^n(R)`` along the tabulated range.

    ``R=None`` takes the smallest integer radius with ``M(R) > R + 1``.
    """
    if R is None:
        R = float(smallest_escape_radius(spec.f, 1.0, samples=samples))
    table, horizon_ok = iterated_max_modulus(spec.f, R, spec.budget, samples)
    X, Y = spec.centers()
    with _threads(n_jobs):
        cl, st, ce = fast_escape_arrays(spec.f, X.ravel(), Y.ravel(), table, horizon_ok,
                                        spec.budget)
    shape = (spec.height, spec.width)
    return RegionMask(spec, cl.reshape(shape), st.reshape(shape), ce.reshape(shape),
                      {"kind": "fast-escape", "R": R, "thresholds": table.tolist(),
                       "horizon_ok": horizon_ok})


def check_palette(palette) -> dict:
    """Normalise a palette to ``{OutcomeClass: (r, g, b)}``; every class needs a distinct colour."""
    if palette is None:
        raise ConfigError("palette is required")
    out = {}
    for key, rgb in palette.items():
        try:
            cls = OutcomeClass[key] if isinstance(key, str) else OutcomeClass(key)
        except (KeyError, ValueError):
            raise ConfigError(f"unknown outcome class in palette: {key!r}") from None
        rgb = tuple(int(v) for v in rgb)
        if len(rgb) != 3 or not all(0 <= v <= 255 for v in rgb):
            raise ConfigError(f"colour for {cls.name} must be three 0..255 integers")
        out[cls] = rgb
    missing = [c.name for c in OutcomeClass if c not in out]
    if missing:
        raise ConfigError(f"palette is missing classes: {missing}")
    if len(set(out.values())) != len(out):
        raise ConfigError("palette colours must be distinct")
    return out


def mask_to_rgb(classes: np.ndarray, palette) -> np.ndarray:
    palette = check_palette(palette)
    lut = np.zeros((len(OutcomeClass), 3), np.uint8)
    for cls, rgb in palette.items():
        lut[int(cls)] = rgb
    return lut[classes.astype(np.intp)]


def write_ppm(path, rgb: np.ndarray) -> None:
    h, w, _ = rgb.shape
    path = Path(path)
    try:
        with open(path, "wb") as fh:
            fh.write(b"P6\n%d %d\n255\n" % (w, h))
            fh.write(np.ascontiguousarray(rgb, dtype=np.uint8).tobytes())
    except OSError as exc:
        raise OSError(f"cannot write image {path}: {exc}") from exc


def read_ppm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    parts = data.split(maxsplit=4)
    if parts[0] != b"P6":
        raise ValueError("not a binary PPM")
    w, h = int(parts[1]), int(parts[2])
    return np.frombuffer(parts[4], np.uint8, count=w * h * 3).reshape(h, w, 3)


def write_image(mask: RegionMask, path, palette=None, overlay: np.ndarray | None = None) -> Path:
    """Write ``path`` as P6 and ``path + '.json'`` with the grid, palette and version.

    ``overlay`` is an optional ``(height, width, 3)`` uint8 image composited
    where it is non-zero (used for component highlighting).
    """
    palette = check_palette(DEFAULT_PALETTE if palette is None else palette)
    rgb = mask_to_rgb(mask.classes, palette)
    if overlay is not None:
        hit = overlay.any(axis=-1)
        rgb[hit] = overlay[hit]
    path = Path(path)
    write_ppm(path, rgb)
    meta = {"tool": "escweb", "version": __version__, "grid": mask.spec.as_dict(),
            "palette": {c.name: list(v) for c, v in palette.items()},
            "mask": mask.meta, "counts": mask.counts()}
    sidecar = path.with_name(path.name + ".json")
    try:
        sidecar.write_text(json.dumps(to_jsonable(meta), indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write metadata {sidecar}: {exc}") from exc
    return path


def default_spec(family: str = "fatou", size=DEFAULT_SIZE, budget: int = DEFAULT_BUDGET) -> GridSpec:
    """Default windows: fatou-type with m=6, bergweiler-type with geometric m=0."""
    if family == "fatou":
        return GridSpec(FATOU_WINDOW, *size, fatou(), RateSequence.arithmetic(6), budget)
    if family == "bergweiler":
        return GridSpec(BERGWEILER_WINDOW, *size, bergweiler(), RateSequence.geometric(0), budget)
    if family == "julia":
        return GridSpec(JULIA_WINDOW, *size, fatou(), RateSequence.arithmetic(6), budget)
    raise ConfigError(f"unknown default window {family!r}")
