import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))


@pytest.fixture
def rng():
    return np.random.default_rng(20260808)


@pytest.fixture
def unit_circle():
    from cforge import FourierCurve

    return FourierCurve((1,), (1.0,))


@pytest.fixture
def quadratic_curve():
    """Boundary of the exact polynomial map zeta + 0.3 zeta^2."""
    from cforge import FourierCurve

    return FourierCurve((1, 2), (1.0, 0.3))
