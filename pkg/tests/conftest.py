import numpy as np
import pytest

from latentw import Distribution, SampleSpace


@pytest.fixture(scope="session")
def space22():
    return SampleSpace(k=2, d=2)


@pytest.fixture(scope="session")
def space23():
    return SampleSpace(k=2, d=3)


@pytest.fixture(scope="session")
def third_mass(space23):
    """P(101)=P(110)=P(111)=1/3 on {0,1}^3; exchangeable weight 1/3."""
    return Distribution.from_mapping(space23,
                                     {"101": 1 / 3, "110": 1 / 3, "111": 1 / 3})


@pytest.fixture(scope="session")
def intro_joint(space22):
    """The 2x2 working example: p = (1/10, 3/10, 1/10, 1/2) over 00,01,10,11."""
    return Distribution(space22, [0.1, 0.3, 0.1, 0.5])


@pytest.fixture(scope="session")
def unique_argmin_fixture(space22):
    """p = (0.4, 0.1, 0.2, 0.3): weight 0.9, unique minima, V(Z) = 0.29."""
    return Distribution(space22, [0.4, 0.1, 0.2, 0.3])


def dirichlet_distributions(space, n, seed, alpha=1.0):
    rng = np.random.default_rng(seed)
    rows = rng.dirichlet(np.full(space.n_outcomes, alpha), size=n)
    return [Distribution(space, row / row.sum()) for row in rows]
