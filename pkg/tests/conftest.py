import pytest

from src.algebra.scalars import GroundRing
from src.algebra.series import TruncatedSeries


@pytest.fixture
def Q():
    return GroundRing("Q")


@pytest.fixture
def F2():
    return GroundRing("Fp", 2)


@pytest.fixture
def F3():
    return GroundRing("Fp", 3)


@pytest.fixture
def univariate():
    """
    Build a one-variable series from a {degree: coefficient} mapping.
    """

    def build(ring, coeffs, order=None):
        return TruncatedSeries(ring, 1, {(d,): c for d, c in coeffs.items()}, order)

    return build
