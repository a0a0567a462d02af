"""Shared fixtures: moderately fine grids that keep the unit suite fast.

Acceptance tests build their own rates at the default production
resolution; everything else runs on [0, 30] with a 5e-3 step, where
quadrature errors sit a couple of orders below the tolerances being
asserted.
"""

import pytest

from renewalkit import HazardRate, SignedMeasure, ramp_rate

A_UNIT = 30.0
H_UNIT = 5e-3
HORIZON_UNIT = 4.0


@pytest.fixture(scope="session")
def rate_const():
    """beta == 1 with a small a_star, the workhorse constant rate."""
    return HazardRate.constant(1.0, a_star=0.1, A_max=A_UNIT, h_a=H_UNIT,
                               horizon=HORIZON_UNIT)


@pytest.fixture(scope="session")
def rate_ramp():
    """beta(a) = min(a, 2): vanishes at birth, saturates at 2."""
    return ramp_rate(2.0, a_star=1.0, beta_min=1.0, A_max=A_UNIT, h_a=H_UNIT,
                     horizon=HORIZON_UNIT)


@pytest.fixture(scope="session")
def rate_const2():
    """beta == 2, for stationary-measure checks."""
    return HazardRate.constant(2.0, a_star=0.1, A_max=A_UNIT, h_a=H_UNIT,
                               horizon=HORIZON_UNIT)


@pytest.fixture()
def dirac_half():
    return SignedMeasure.dirac(0.5, A_max=A_UNIT, h_a=H_UNIT)


@pytest.fixture()
def uniform_02():
    return SignedMeasure.uniform(0.0, 2.0, A_max=A_UNIT, h_a=H_UNIT)
