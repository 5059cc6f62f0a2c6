import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from escweb import Family, RateSequence, bergweiler, evaluate, fatou
from escweb.geometry import (TWO_PI, RectR, absorbing_set_samples, half_strip_of,
                             in_absorbing_half_plane, modulus_bound_samples, rect_contains,
                             rect_containment_sweep, rect_in_disc_check, strip_at_level,
                             strip_coverage_check, strip_for_row, strip_row,
                             verify_absorbing_sets, verify_modulus_bounds)

F, B = Family.FATOU, Family.BERGWEILER


def test_rect_membership():
    assert rect_contains(RectR(6, 0, F), 0)
    assert not rect_contains(RectR(6, 0, F), 6)  # open rectangle
    assert rect_contains(RectR(0, 0, B), 3)
    assert not rect_contains(RectR(0, 0, B), 4)
    r = RectR(6, 0, F)
    assert (r.half_width, r.half_height) == (6, 12 * math.pi)


def test_rect_in_disc_examples():
    r = RectR(6, 0, F)
    assert math.hypot(r.half_width, r.half_height) == pytest.approx(6 * math.sqrt(1 + 4 * math.pi ** 2))
    assert rect_in_disc_check(r)
    assert rect_in_disc_check(RectR(0, 0, B))
    assert math.hypot(4, 2 * math.pi) == pytest.approx(math.sqrt(16 + 4 * math.pi ** 2))


def test_rect_sweep_passes():
    rep = rect_containment_sweep(100, 100)
    assert rep.passed and not rep.failures


@settings(max_examples=200, deadline=None)
@given(m=st.integers(1, 100), k=st.integers(0, 100))
def test_fatou_corner_ratio_independent_of_size(m, k):
    r = RectR(m, k, F)
    ratio = math.hypot(r.half_width, r.half_height) / r.disc_radius
    assert ratio == pytest.approx(math.sqrt(1 + 4 * math.pi ** 2) / (3 * math.pi), rel=1e-12)


def test_half_strip_examples():
    s = half_strip_of(complex(-10, 1), 1, 1)
    assert (s.j, s.x_cutoff, s.y_low, s.y_high) == (0, -3.0, 0.0, TWO_PI)
    s = half_strip_of(complex(-10, 9 * math.pi), 1, 1)
    assert s.j == 4 and s.x_cutoff == 3.0
    assert half_strip_of(0, 1, 1) is None


def test_strip_boundary_goes_to_lower_row():
    assert strip_row(TWO_PI) == 0
    assert strip_row(0.0) == -1
    assert strip_row(0.5) == 0
    s = half_strip_of(complex(-10, TWO_PI), 0, 1)
    assert s.j == 0


def test_bergweiler_strips_open_rightward():
    # the strip used for k = 0 sits one level up: cutoff 2^(k+3) for |j| small
    s = half_strip_of(complex(9, 1), 0, 0, B)
    assert s.x_cutoff == 8.0 and s.j == 0 and not s.contains(complex(7, 1))
    assert strip_for_row(1, 2, 0, B).x_cutoff == -8.0
    assert strip_for_row(1, -2, 0, B).x_cutoff == 8.0
    assert strip_for_row(1, -3, 0, B).x_cutoff == -8.0


def test_coverage_examples():
    assert in_absorbing_half_plane(complex(5, 1), 0, 1, F)
    assert strip_at_level(complex(-5, 1), 1, 1, F).j == 0
    s = strip_at_level(10 * math.pi * 1j + 1e-9j, 1, 1, F)
    assert s.j == 5 and s.x_cutoff == 2.0


@pytest.mark.parametrize("family, m", [(F, 1), (F, 6), (B, 0)])
@pytest.mark.parametrize("k", [0, 1, 2])
def test_strip_coverage(family, m, k):
    rep = strip_coverage_check(k, m, family, samples=20_000, seed=k)
    assert rep.passed, rep.failures[:3]


@settings(max_examples=300, deadline=None)
@given(x=st.floats(-100, 100), y=st.floats(-100, 100), k=st.integers(0, 3), m=st.integers(1, 8))
def test_dichotomy_property(x, y, k, m):
    z = complex(x, y)
    if RectR(m, k + 1, F).contains(z):
        return
    if abs(abs(x) - (m + k + 1)) < 1e-9 or abs(y / TWO_PI - round(y / TWO_PI)) < 1e-9:
        return
    hp = in_absorbing_half_plane(z, k, m, F)
    hits = [j for j in range(strip_row(y) - 1, strip_row(y) + 2)
            if strip_for_row(k + 1, j, m, F).contains(z)]
    assert hp != bool(hits) and len(hits) <= 1


@pytest.mark.parametrize("f, m", [(fatou(), 1), (fatou(), 6), (bergweiler(), 0), (bergweiler(), 2)])
def test_absorbing_sets_are_members(f, m):
    rep = verify_absorbing_sets(f, m, per_set=100, seed=3)
    assert rep.passed and rep.details["all_member"]


def test_absorbing_samples_shape():
    s = absorbing_set_samples(fatou(), 6, 50, seed=1)
    assert set(s) == {"half_plane", "half_lines", "lines"}
    assert np.all(s["half_plane"].real >= 6)
    j = np.round(s["half_lines"].imag / TWO_PI)
    assert np.all(np.abs(j) < 6) and np.all(s["half_lines"].real <= -6)
    j = np.round(s["lines"].imag / TWO_PI)
    assert np.all((np.abs(j) >= 6) & (np.abs(j) <= 11))


def test_modulus_bound_examples():
    w = abs(evaluate(fatou(), -3))
    assert w == pytest.approx(math.exp(3) - 2)
    assert math.exp(3) / 2 <= w <= 2 * math.exp(3)
    z = complex(-4, 2)
    assert math.exp(4) / 2 <= abs(evaluate(fatou(), z)) <= 2 * math.exp(4)
    w = abs(evaluate(bergweiler(), 4))
    assert math.exp(4) / 2 <= w <= 2 * math.exp(4)


@pytest.mark.parametrize("f", [fatou(), bergweiler()])
def test_modulus_bounds_sampled(f):
    rep = verify_modulus_bounds(f, samples=100_000, seed=11)
    assert rep.passed and rep.details["violations"] == 0
    z = modulus_bound_samples(f, 1000, seed=2)
    t = -z.real if f is not None and f.d < 0 else z.real
    assert np.all(np.abs(z) <= 2 * t)


@settings(max_examples=300, deadline=None)
@given(t=st.floats(3, 700), s=st.floats(-1, 1))
def test_fatou_modulus_bound_property(t, s):
    z = complex(-t, s * math.sqrt(3) * t)  # |z| <= 2t
    w = abs(evaluate(fatou(), z))
    assert math.exp(t) / 2 * (1 - 1e-12) <= w <= 2 * math.exp(t) * (1 + 1e-12)


def test_rates_helper_used_by_absorbing_check():
    rep = verify_absorbing_sets(fatou(), 1, per_set=10, rates=RateSequence.arithmetic(1))
    assert rep.details["rates"]["m"] == 1


@pytest.mark.parametrize("family, m", [(F, 1), (B, 0)])
def test_vectorised_coverage_agrees_with_scalar_strips(family, m):
    # the same dichotomy through the scalar strip lookup, on a few thousand points
    rng = np.random.default_rng(5)
    rect = RectR(m, 1, family)
    for x, y in rng.uniform(-100, 100, size=(3000, 2)):
        z = complex(x, y)
        if rect.contains(z):
            continue
        s = half_strip_of(z, 0, m, family)
        assert in_absorbing_half_plane(z, 0, m, family) != (s is not None)
