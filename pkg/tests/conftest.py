from __future__ import annotations

import numpy as np
import pytest

from carnotw1.carnot_core import make_heisenberg, make_step2_group
from carnotw1.norms import hebisch_sikora, hs_r0, koranyi, lee_naor, pmax


def generic_bracket() -> np.ndarray:
    """A step-two law on R^3 x R^2 with a non-symplectic bracket."""
    B = np.zeros((3, 3, 2))
    B[0, 1, 0], B[1, 0, 0] = 1.5, -1.5
    B[0, 2, 1], B[2, 0, 1] = -0.7, 0.7
    B[1, 2, 0], B[2, 1, 0] = 0.4, -0.4
    B[1, 2, 1], B[2, 1, 1] = 1.1, -1.1
    return B


@pytest.fixture(scope="session")
def heis1():
    return make_heisenberg(1)


@pytest.fixture(scope="session")
def heis2():
    return make_heisenberg(2)


@pytest.fixture(scope="session")
def step2():
    return make_step2_group(3, 2, generic_bracket())


@pytest.fixture(scope="session")
def kor(heis1):
    return koranyi(heis1)


@pytest.fixture(scope="session")
def heis1_norms(heis1):
    r0 = hs_r0(heis1)
    return {
        "koranyi": koranyi(heis1),
        "lee-naor": lee_naor(heis1),
        "pmax": pmax(heis1, 2.0, 1.0),
        "hs": hebisch_sikora(heis1, r0 / 2),
    }


@pytest.fixture
def gen():
    return np.random.default_rng(12345)
