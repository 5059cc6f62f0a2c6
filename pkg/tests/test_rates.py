import math

import numpy as np
import pytest

from escweb import RateSequence


def test_arithmetic_values():
    r = RateSequence.arithmetic(6)
    assert r(1) == 3.5
    assert r.values(4).tolist() == [3.5, 4.0, 4.5, 5.0]


def test_geometric_values():
    r = RateSequence.geometric(0)
    assert r(1) == pytest.approx(math.sqrt(2))
    assert r(50) == pytest.approx(2 ** 25)
    assert r.log(2000) == pytest.approx(1000 * math.log(2))


@pytest.mark.parametrize("r", [RateSequence.arithmetic(0), RateSequence.arithmetic(9),
                               RateSequence.geometric(0), RateSequence.geometric(3)])
def test_strictly_increasing(r):
    assert np.all(np.diff(r.values(200)) > 0)


def test_invalid():
    with pytest.raises(ValueError):
        RateSequence.arithmetic(-1)
    with pytest.raises(ValueError):
        RateSequence("harmonic", 0)
