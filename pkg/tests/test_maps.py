import cmath
import math

import pytest

from escweb import ExpAffineMap, Family, bergweiler, derivative, evaluate, fatou
from escweb.maps import arg_image, log_modulus


def test_canonical_parameters():
    d = fatou().as_dict()
    assert (d["a"], d["b"], d["c"], d["d"]) == (1.0, 1.0, 1.0, -1.0)
    assert d["family"] == "fatou-type"
    g = bergweiler()
    assert (g.a, g.c, g.d) == (2.0, -1.0, 1.0)
    assert g.b == pytest.approx(2 - math.log(2), abs=0)


@pytest.mark.parametrize("abcd, family", [
    ((1, 1, 1, -1), Family.FATOU),
    ((1, -3, 2, 0.5), Family.FATOU),
    ((2, 2 - math.log(2), -1, 1), Family.BERGWEILER),
    ((1.5, 0, 1, 1), Family.BERGWEILER),
    ((1, 1, 1, 1), Family.OTHER),       # b*d > 0
    ((0.5, 1, 1, -1), Family.OTHER),
    ((1, 0, 1, -1), Family.OTHER),      # b*d = 0
])
def test_family_tag(abcd, family):
    assert ExpAffineMap(*abcd).family is family


@pytest.mark.parametrize("bad", [(1, 1, 0, -1), (1, 1, 1, 0), (1, math.nan, 1, 1), (math.inf, 1, 1, 1)])
def test_rejects_degenerate_maps(bad):
    with pytest.raises(ValueError):
        ExpAffineMap(*bad)


def test_evaluate_examples():
    assert evaluate(fatou(), 0) == 2
    assert abs(evaluate(fatou(), math.pi * 1j) - math.pi * 1j) < 1e-12
    assert abs(evaluate(fatou(), -math.pi * 1j) + math.pi * 1j) < 1e-12
    assert abs(evaluate(bergweiler(), math.log(2)) - math.log(2)) < 1e-14


def test_evaluate_matches_formula(rng):
    f = fatou()
    for z in rng.uniform(-20, 20, 50) + 1j * rng.uniform(-20, 20, 50):
        want = z + 1 + cmath.exp(-z)
        got = evaluate(f, z)
        assert abs(got - want) <= 4 * 2.2e-16 * (abs(z) + 1 + abs(cmath.exp(-z)))


def test_derivative_examples():
    assert abs(derivative(fatou(), math.pi * 1j) - 2) < 1e-15
    assert abs(derivative(bergweiler(), math.log(2))) < 1e-14
    assert derivative(fatou(), 0) == 0


def test_overflow_is_an_error():
    with pytest.raises(OverflowError):
        evaluate(fatou(), -710)
    with pytest.raises(OverflowError):
        derivative(bergweiler(), 710)
    assert math.isfinite(abs(evaluate(fatou(), -709)))


def test_log_modulus_and_argument_agree_in_range(rng):
    for f in (fatou(), bergweiler()):
        for z in rng.uniform(-30, 30, 40) + 1j * rng.uniform(-10, 10, 40):
            w = evaluate(f, z)
            assert log_modulus(f, z) == pytest.approx(math.log(abs(w)), rel=1e-12, abs=1e-12)
            assert math.cos(arg_image(f, z)) == pytest.approx(math.cos(cmath.phase(w)), abs=1e-9)


def test_log_modulus_beyond_range():
    # |f(-1000 + i pi)| = e^1000 - 999 to double precision
    z = complex(-1000, math.pi)
    assert log_modulus(fatou(), z) == pytest.approx(1000.0, rel=1e-15)
    assert math.cos(arg_image(fatou(), z)) == pytest.approx(-1.0, abs=1e-12)
