import numpy as np
import pytest

from mass_lab import (FlatMetric, GluedMetric, SchwarzschildIsotropic,
                      solve_asymptotic)


@pytest.fixture(scope="session")
def flat():
    return FlatMetric()


@pytest.fixture(scope="session")
def schw():
    return SchwarzschildIsotropic(1.0)


@pytest.fixture(scope="session")
def glued(schw):
    """Schwarzschild m=1 exterior glued to a Euclidean ball at r0 = 1."""
    return GluedMetric(schw, FlatMetric(), 1.0)


@pytest.fixture(scope="session")
def transmission_field(glued):
    return solve_asymptotic(glued, "transmission", r0=1.0)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
