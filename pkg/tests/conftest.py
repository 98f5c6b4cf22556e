"""Shared fixtures: problem configurations at the sizes the tests need."""

import pytest
from dataclasses import replace

from tweezerlab import ProblemConfig


@pytest.fixture(scope="session")
def cfg():
    """Default problem: n_points=256, dt=0.002."""
    return ProblemConfig()


@pytest.fixture(scope="session")
def cfg128():
    """Coarser grid for gradient checks."""
    return ProblemConfig().with_grid(128)


@pytest.fixture(scope="session")
def cfg512():
    """Finer grid for the physics acceptance runs."""
    return ProblemConfig().with_grid(512)


@pytest.fixture(scope="session")
def cfg_fine_dt():
    """Half time step; used where the Strang splitting error of the deep
    wells at dt=0.002 would dominate the quantity under test."""
    return replace(ProblemConfig(), dt=0.001)
