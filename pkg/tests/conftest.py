import numpy as np
import pytest

from app.services.densities import Coupled, DoubleWell, PNorm, Quadratic
from app.services.envelope import EnvelopeOptions
from app.services.symbols import resolve_operator
from app.services.torus import TorusGrid


@pytest.fixture
def div2d():
    return resolve_operator("div2d")


@pytest.fixture
def scaled_div():
    return resolve_operator("scaled-div2d")


@pytest.fixture
def curl2d():
    return resolve_operator("scalar-curl2d")


@pytest.fixture
def quad():
    return Quadratic()


@pytest.fixture
def dwell():
    return DoubleWell()


@pytest.fixture
def pnorm4():
    return PNorm(4.0)


@pytest.fixture
def coupled():
    return Coupled()


@pytest.fixture
def grid16():
    return TorusGrid(2, 16)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def quick_options():
    # small ladder for envelope solves inside unit tests
    return EnvelopeOptions(ladder=[8, 16], random_starts=1, laminate_seeds=2, direction_count=16)
