import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from padicdyn import make_ring


@pytest.fixture(scope="session")
def z2():
    return make_ring(2, N=24)


@pytest.fixture(scope="session")
def z3():
    return make_ring(3, N=24)


@pytest.fixture(scope="session")
def z5():
    return make_ring(5, N=24)


@pytest.fixture(scope="session")
def unram9():
    """Unramified quadratic over Z3: q = 9."""
    return make_ring(3, unram_poly=[1, 0, 1], N=24)


@pytest.fixture(scope="session")
def ram3():
    """Q3(sqrt 3): e = 2, pi = sqrt 3."""
    return make_ring(3, eis_poly=[-3, 0, 1], N=24)
