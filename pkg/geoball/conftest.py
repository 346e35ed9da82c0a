"""Shared fixtures: ball profiles are expensive, so each is computed once per session."""

import numpy as np
import pytest

from geoball.ballvolume import ball_functions, sphere_quadrature
from geoball.geodesics import RayOptions
from geoball.manifolds import BergerSphere, DoublyWarped, ProductS2R, SpaceForm, make_cap_metric


def _profile(family, t_max, level=1, step=0.01):
    return ball_functions(family, family.base_point(), RayOptions(t_max=t_max, step=step), sphere_quadrature(level))


@pytest.fixture(scope="session")
def flat_profile():
    return _profile(SpaceForm(0.0), 1.0)


@pytest.fixture(scope="session")
def sphere_profile():
    return _profile(SpaceForm(1.0), 1.5)


@pytest.fixture(scope="session")
def hyperbolic_profile():
    return _profile(SpaceForm(-1.0), 1.3)


@pytest.fixture(scope="session")
def warped_profile():
    return _profile(DoublyWarped(2.0), 0.5, level=2)


@pytest.fixture(scope="session")
def berger_profile():
    return _profile(BergerSphere(0.5), 1.4)


@pytest.fixture(scope="session")
def product_profile():
    return _profile(ProductS2R(1.0), 1.4)


@pytest.fixture(scope="session")
def cap_family():
    return make_cap_metric(1.0, 0.2)


@pytest.fixture(scope="session")
def cap_profile(cap_family):
    return _profile(cap_family, cap_family.safe_radius)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
