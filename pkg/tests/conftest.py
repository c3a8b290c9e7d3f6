# tests/conftest.py
import pytest

from app.core.config import get_settings
from tests.utils.factories import space_of, trig

SIN = ((1,), "sin", 1)
COS = ((1,), "cos", 1)
ONE = ((0,), "cos", 1)


@pytest.fixture(autouse=True)
def fresh_settings():
    """Settings are cached per process; tests that patch the environment need a clean cache."""
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def sin_cos_space():
    return space_of(1, trig(1, SIN), trig(1, COS))


@pytest.fixture
def sin_cos_exact():
    return space_of(1, trig(1, SIN, mode="exact"), trig(1, COS, mode="exact"), mode="exact")


@pytest.fixture
def sin_space():
    return space_of(1, trig(1, SIN))


@pytest.fixture
def constant_space():
    return space_of(1, trig(1, ONE))


@pytest.fixture
def one_sin_space():
    return space_of(1, trig(1, ONE), trig(1, SIN))


@pytest.fixture
def product_space():
    """sin(2 pi x) sin(2 pi y) on the 2-torus."""
    return space_of(2, trig(2, ((1, -1), "cos", "1/2"), ((1, 1), "cos", "-1/2")))


@pytest.fixture
def product_space_exact():
    return space_of(
        2, trig(2, ((1, -1), "cos", "1/2"), ((1, 1), "cos", "-1/2"), mode="exact"), mode="exact"
    )


@pytest.fixture
def eigen_space_2d():
    """sin/cos in x and in y: one Laplace eigenspace on the 2-torus."""
    return space_of(
        2,
        trig(2, ((1, 0), "sin", 1)),
        trig(2, ((1, 0), "cos", 1)),
        trig(2, ((0, 1), "sin", 1)),
        trig(2, ((0, 1), "cos", 1)),
    )
