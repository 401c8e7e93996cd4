import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from cauchylens import generators
from cauchylens.calculus import build_calculus
from cauchylens.phasespace import PhaseSpace
from cauchylens.relativize import ExtendedSpace
from cauchylens.gluing import GluingSetup

settings.register_profile(
    "lens",
    max_examples=25,
    deadline=None,
    suppress_health_check=[HealthCheck.function_scoped_fixture, HealthCheck.too_slow],
)
settings.load_profile("lens")


@pytest.fixture(scope="session")
def small_annulus():
    return generators.annulus(n_radial=4, n_angular=24)


@pytest.fixture(scope="session")
def calc(small_annulus):
    return build_calculus(small_annulus)


@pytest.fixture(scope="session")
def disk_calc():
    return build_calculus(generators.disk(n_rings=4))


@pytest.fixture(scope="session")
def band_calc():
    return build_calculus(generators.cylinder_band(n_axial=4, n_angular=24))


@pytest.fixture(scope="session")
def ps(calc):
    return PhaseSpace(calc, name="bulk")


@pytest.fixture(scope="session")
def ext(ps):
    return ExtendedSpace(ps)


@pytest.fixture(scope="session")
def split():
    return generators.split_sphere(n_lat=6, n_lon=16)


@pytest.fixture(scope="session")
def glue_setup(split):
    return GluingSetup.from_split(split)


@pytest.fixture
def rng():
    return np.random.default_rng(20241015)
