import math

import numpy as np
import pytest
from sklearn.base import clone

from escweb import (FastEscapeClassifier, OutcomeClass, RateSequence, UniformEscapeClassifier,
                    bergweiler, classify_point, fatou)


def test_params_roundtrip():
    clf = UniformEscapeClassifier(rates=RateSequence.geometric(2), budget=50)
    params = clf.get_params()
    assert params["budget"] == 50 and params["rates"] == RateSequence.geometric(2)
    other = clone(clf)
    assert other.get_params() == params and other is not clf


def test_predict_shapes_and_values():
    clf = UniformEscapeClassifier().fit()
    X = np.array([[6.0, math.pi * 1j], [12 * math.pi * 1j, -16]])
    pred = clf.predict(X)
    assert pred.shape == (2, 2)
    assert pred[0, 0] == OutcomeClass.MEMBER and pred[0, 1] == OutcomeClass.VIOLATED
    assert clf.predict_member([6.0]).tolist() == [True]


def test_real_pairs_accepted():
    clf = UniformEscapeClassifier().fit()
    a = clf.predict(np.array([[6.0, 0.0], [0.0, math.pi]]))
    b = clf.predict(np.array([6.0, math.pi * 1j]))
    assert a.tolist() == b.tolist()


def test_outcomes_match_scalar_api(rng):
    f, rates = bergweiler(), RateSequence.geometric(0)
    clf = UniformEscapeClassifier(f, rates, budget=100).fit()
    z = rng.uniform(-20, 20, 30) + 1j * rng.uniform(-20, 20, 30)
    for w, out in zip(z, clf.outcomes(z)):
        assert out == classify_point(f, rates, w, 100)


def test_thread_count_does_not_change_results(rng):
    z = rng.uniform(-8, 8, 2000) + 1j * rng.uniform(-40, 40, 2000)
    a = UniformEscapeClassifier(n_jobs=1).fit().classify(z)
    b = UniformEscapeClassifier(n_jobs=4).fit().classify(z)
    for x, y in zip(a, b):
        assert np.array_equal(x, y)


def test_fast_escape_classifier():
    clf = FastEscapeClassifier(R=5.0).fit()
    assert clf.predict([math.pi * 1j]).tolist() == [OutcomeClass.VIOLATED]
    auto = FastEscapeClassifier().fit()
    assert auto.R_ >= 1 and auto.thresholds_[0] > auto.R_


def test_bad_parameters():
    with pytest.raises(ValueError):
        UniformEscapeClassifier(budget=0).fit()
    with pytest.raises(TypeError):
        UniformEscapeClassifier(f="fatou").fit()
    with pytest.raises(ValueError):
        UniformEscapeClassifier().fit().predict([complex(math.nan, 0)])
