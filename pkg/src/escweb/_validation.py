"""Input validation helpers shared by the estimators, raster engine and CLI."""
from __future__ import annotations

import math
import numbers

import numpy as np


class ConfigError(ValueError):
    """Invalid configuration value (bad flag, palette, window, ...)."""


def check_points(X) -> tuple[np.ndarray, np.ndarray, tuple]:
    """Split complex points into contiguous real/imag float arrays.

    Accepts a complex scalar or array of any shape, or a real array whose
    last axis has length 2 (``[..., (re, im)]``). Returns ``(xs, ys, shape)``
    where ``shape`` is the shape predictions should be reshaped to.
    """
    arr = np.asarray(X)
    if arr.dtype == object:
        arr = arr.astype(np.complex128)
    if np.iscomplexobj(arr):
        shape = arr.shape
        flat = arr.ravel()
        xs, ys = flat.real, flat.imag
    else:
        arr = arr.astype(np.float64)
        if arr.ndim == 0 or arr.shape[-1] != 2:
            if arr.ndim <= 1:
                # plain real numbers are points on the real axis
                shape = arr.shape
                xs = arr.ravel()
                ys = np.zeros_like(xs)
                return _finish(xs, ys, shape)
            raise ValueError(f"real input must have a trailing axis of length 2, got {arr.shape}")
        shape = arr.shape[:-1]
        xs, ys = arr[..., 0].ravel(), arr[..., 1].ravel()
    return _finish(xs, ys, shape)


def _finish(xs, ys, shape):
    xs = np.ascontiguousarray(xs, dtype=np.float64)
    ys = np.ascontiguousarray(ys, dtype=np.float64)
    if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
        raise ValueError("points must be finite")
    return xs, ys, shape


def check_int(name: str, value, minimum: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        if isinstance(value, float) and value.is_integer():
            value = int(value)
        else:
            raise ConfigError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if minimum is not None and value < minimum:
        raise ConfigError(f"{name} must be >= {minimum}, got {value}")
    return value


def check_real(name: str, value, positive: bool = False) -> float:
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be a real number, got {value!r}") from None
    if not math.isfinite(value):
        raise ConfigError(f"{name} must be finite")
    if positive and value <= 0:
        raise ConfigError(f"{name} must be positive, got {value}")
    return value


def check_window(window) -> tuple[float, float, float, float]:
    try:
        xmin, xmax, ymin, ymax = (check_real("window", v) for v in window)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"window must be (xmin, xmax, ymin, ymax): {exc}") from None
    if not (xmin < xmax and ymin < ymax):
        raise ConfigError(f"window must satisfy xmin < xmax and ymin < ymax, got {window}")
    return xmin, xmax, ymin, ymax
