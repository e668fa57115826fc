import random

import pytest
from hypothesis import settings

from rootbench.exprlang import builtin_suite
from rootbench.mpreal import Precision, make

settings.register_profile("suite", max_examples=60, deadline=None)
settings.load_profile("suite")

P100 = Precision(100)
P300 = Precision(300)


@pytest.fixture(scope="session")
def suite():
    return {fn.label: fn for fn in builtin_suite()}


#: per-function windows that stay inside every sub-expression's domain and
#: away from stationary points of f
SAFE_WINDOWS = {
    "f1": ("0.2", "1.4"),
    "f2": ("0.8", "1.6"),
    "f3": ("-0.8", "0.6"),
    "f4": ("-0.4", "0.6"),
    "f5": ("-3.2", "-1.5"),
    "f6": ("0.2", "1.5"),
    "f7": ("-2.8", "-1.2"),
}


def random_point(rng: random.Random, label: str, precision: Precision):
    """Uniform-ish point in the function's safe window, exact in decimal."""
    lo, hi = SAFE_WINDOWS[label]
    lo_m, hi_m = int(float(lo) * 10**6), int(float(hi) * 10**6)
    return make(f"{rng.randint(lo_m, hi_m)}e-6", precision)
