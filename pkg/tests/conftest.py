import math

import pytest

from thermoflow.params import DimensionlessParams, PhysicalParams

DESK = DimensionlessParams(pr_x=1.0, pr_z=1.0, kappa_a=1.0, alpha=2.0)
DESK_RC = 2.0 * math.pi**2


@pytest.fixture
def desk():
    return DESK


@pytest.fixture
def example_physical():
    return PhysicalParams(T0=20.0, T1=5.3979, H=1000.0, L=50000.0, mu_x=1e4, mu_z=10.0,
                          kappa_x=100.0, kappa_z=1.0, rho0=1.2, beta=1e-4, g=9.8)


@pytest.fixture
def unit_physical():
    return PhysicalParams(T0=1.0, T1=0.0, H=1.0, L=1.0, mu_x=1.0, mu_z=1.0, kappa_x=1.0,
                          kappa_z=1.0, rho0=1.0, beta=1.0, g=1.0)
