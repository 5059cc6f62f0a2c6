"""Uniform escape sets of exponential-affine entire maps and their complementary components."""

__version__ = "0.1.0"

import numba  # noqa: E402

# skip probing the TBB layer, which warns on the installed TBB version
numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

from .maps import ExpAffineMap, Family, bergweiler, derivative, evaluate, fatou  # noqa: E402
from .rates import RateKind, RateSequence  # noqa: E402
from .orbits import (  # noqa: E402
    Certificate,
    OrbitOutcome,
    OutcomeClass,
    classify_point,
    fast_escape_test,
)
from .maxmod import (  # noqa: E402
    InvalidRadius,
    MaxModEstimate,
    UnsupportedMap,
    cycle_in_disc_check,
    max_modulus,
    rate_domination_check,
)
from .estimators import FastEscapeClassifier, UniformEscapeClassifier  # noqa: E402

__all__ = [
    "ExpAffineMap", "Family", "fatou", "bergweiler", "evaluate", "derivative",
    "RateKind", "RateSequence",
    "Certificate", "OrbitOutcome", "OutcomeClass", "classify_point", "fast_escape_test",
    "InvalidRadius", "MaxModEstimate", "UnsupportedMap", "max_modulus",
    "rate_domination_check", "cycle_in_disc_check",
    "UniformEscapeClassifier", "FastEscapeClassifier",
]
