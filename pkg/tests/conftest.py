import math

import numpy as np
import pytest
from hypothesis import settings

from minmodlab.zeros import e_m_squared, single_zero

settings.register_profile("ci", max_examples=60, deadline=None)
settings.load_profile("ci")


@pytest.fixture(scope="session")
def em30():
    return e_m_squared(30)


@pytest.fixture(scope="session")
def em120():
    return e_m_squared(120)


@pytest.fixture
def unit_zero_pos():
    """f(z) = 1 - z."""
    return single_zero(1.0, 1, 0.0)


@pytest.fixture
def unit_zero_neg():
    """f(z) = 1 + z."""
    return single_zero(1.0, 1, math.pi)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
