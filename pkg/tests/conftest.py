import numpy as np
import pytest

from todalax.chevalley import cached_algebra
from todalax.involution import compact_conjugation
from todalax.laxflow import FlowSpec, integrate_flow, random_graded_loop


@pytest.fixture(scope="session")
def a2():
    return cached_algebra("A", 2)


@pytest.fixture(scope="session")
def a2_conj(a2):
    return compact_conjugation(a2)


@pytest.fixture(scope="session")
def g2():
    return cached_algebra("G", 2)


@pytest.fixture(scope="session")
def a2_d4_grids(a2, a2_conj):
    """A2 compact d=4 flow grids at three resolutions (coarse to fine),
    shared by the Toda and acceptance tests."""
    seed = random_graded_loop(a2, a2_conj, 4, seed=7)
    return {
        h: integrate_flow(FlowSpec(a2, a2_conj, 4, seed,
                                   lx=0.5, ly=0.5, h=h))
        for h in (0.02, 0.01, 0.005)
    }


@pytest.fixture(scope="session")
def unit_lambdas():
    return np.exp(2j * np.pi * np.arange(8) / 8)
