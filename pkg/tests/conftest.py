import pytest

from growth.registry import get_function
from nodes.exact_distribution import distribution_sequence


@pytest.fixture(scope="session")
def harmonic():
    return get_function("harmonic")


@pytest.fixture(scope="session")
def geometric():
    return get_function("geometric")


@pytest.fixture(scope="session")
def harmonic_laws(harmonic):
    """Exact laws of X_0, X_1, X_2 for the harmonic model."""
    return distribution_sequence(harmonic, 2)
