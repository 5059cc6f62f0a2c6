"""Estimator-style front ends for point classification.

Both classifiers follow the scikit-learn conventions: constructor arguments
are stored untouched, ``fit`` validates them and precomputes state (trailing
underscore attributes), ``predict`` maps complex points to outcome codes.
Nothing is learned from data; ``fit`` accepts and ignores ``X``.
"""
from __future__ import annotations

import contextlib

import numba
import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_int, check_points, check_real
from .maps import ExpAffineMap, fatou
from .maxmod import DEFAULT_SAMPLES, iterated_max_modulus, smallest_escape_radius
from .orbits import (
    DEFAULT_BUDGET,
    OrbitOutcome,
    OutcomeClass,
    _outcome,
    certificate_params,
    classify_arrays,
    fast_escape_arrays,
)
from .rates import RateSequence


@contextlib.contextmanager
def _threads(n_jobs):
    if n_jobs is None:
        yield
        return
    n = numba.config.NUMBA_NUM_THREADS if n_jobs == -1 else max(1, min(int(n_jobs), numba.config.NUMBA_NUM_THREADS))
    old = numba.get_num_threads()
    numba.set_num_threads(n)
    try:
        yield
    finally:
        numba.set_num_threads(old)


class _OrbitClassifierBase(BaseEstimator):
    classes_ = np.array([c.value for c in OutcomeClass])

    def _raw(self, xs, ys):
        raise NotImplementedError

    def classify(self, X):
        """Return ``(classes, steps, certificates)`` arrays shaped like ``X``."""
        check_is_fitted(self)
        xs, ys, shape = check_points(X)
        with _threads(self.n_jobs):
            cl, st, ce = self._raw(xs, ys)
        return cl.reshape(shape), st.reshape(shape), ce.reshape(shape)

    def predict(self, X):
        """Outcome class code (:class:`OutcomeClass`) per point."""
        return self.classify(X)[0]

    def outcomes(self, X) -> list[OrbitOutcome]:
        cl, st, ce = (a.ravel() for a in self.classify(X))
        return [_outcome(int(a), int(b), int(c)) for a, b, c in zip(cl, st, ce)]

    def predict_member(self, X):
        return self.predict(X) == OutcomeClass.MEMBER


class UniformEscapeClassifier(_OrbitClassifierBase):
    """Classify points against ``|f^n(z)| >= a_n`` with absorbing certificates.

    Parameters
    ----------
    f : ExpAffineMap, default fatou()
    rates : RateSequence, default arithmetic with m=6
    budget : int
        Maximum number of iterations per point.
    n_jobs : int or None
        Worker threads for the per-point kernel; results do not depend on it.

    Examples
    --------
    >>> clf = UniformEscapeClassifier(rates=RateSequence.arithmetic(6)).fit()
    >>> clf.predict([6.0, 3.14159j]).tolist()
    [1, 0]
    """

    def __init__(self, f: ExpAffineMap | None = None, rates: RateSequence | None = None,
                 budget: int = DEFAULT_BUDGET, n_jobs: int | None = None):
        self.f = f
        self.rates = rates
        self.budget = budget
        self.n_jobs = n_jobs

    def fit(self, X=None, y=None):
        self.f_ = self.f if self.f is not None else fatou()
        if not isinstance(self.f_, ExpAffineMap):
            raise TypeError("f must be an ExpAffineMap")
        self.rates_ = self.rates if self.rates is not None else RateSequence.arithmetic(6)
        self.budget_ = check_int("budget", self.budget, 1)
        self.certificate_params_ = certificate_params(self.f_, self.rates_)
        return self

    def _raw(self, xs, ys):
        return classify_arrays(self.f_, self.rates_, xs, ys, self.budget_,
                               self.certificate_params_)


class FastEscapeClassifier(_OrbitClassifierBase):
    """Compare orbits with the iterated maximum modulus ``M^n(R)``.

    ``fit`` tabulates ``M^n(R)`` while it is representable. ``R=None`` picks
    the smallest integer with ``M(R) > R + 1``.
    """

    def __init__(self, f: ExpAffineMap | None = None, R: float | None = None,
                 budget: int = DEFAULT_BUDGET, samples: int = DEFAULT_SAMPLES,
                 n_jobs: int | None = None):
        self.f = f
        self.R = R
        self.budget = budget
        self.samples = samples
        self.n_jobs = n_jobs

    def fit(self, X=None, y=None):
        self.f_ = self.f if self.f is not None else fatou()
        self.budget_ = check_int("budget", self.budget, 1)
        samples = check_int("samples", self.samples, 16)
        if self.R is None:
            self.R_ = float(smallest_escape_radius(self.f_, 1.0, samples=samples))
        else:
            self.R_ = check_real("R", self.R, positive=True)
        self.thresholds_, self.horizon_ok_ = iterated_max_modulus(
            self.f_, self.R_, self.budget_, samples)
        return self

    def _raw(self, xs, ys):
        return fast_escape_arrays(self.f_, xs, ys, self.thresholds_, self.horizon_ok_,
                                  self.budget_)
