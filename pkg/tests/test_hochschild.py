import pytest

from src.ainfinity.deformation import AInfinityDeformation
from src.algebra.exterior import Multivector, canonical_v
from src.algebra.series import TruncatedSeries
from src.hochschild.cochains import (
    HochschildCochain,
    cup_product,
    hh_via_insertion,
    hh_window_complex,
    hochschild_differential,
    insertion_map,
)
from src.shared_models import ArityCapError, InvalidInputError
from src.transfer.minimal_model import minimal_model


@pytest.fixture
def formal_line(Q):
    return AInfinityDeformation.formal(Q, 1, 5, 3)


def test_unit_cochain_is_a_cocycle(formal_line):
    """
    Test that d(1) = 0 for the unit cochain.
    """

    unit = HochschildCochain.unit(formal_line, 3)
    d_unit = hochschild_differential(unit, formal_line)
    assert d_unit.parity == 1
    assert d_unit.is_zero()


def test_unit_is_a_two_sided_identity_for_cup(formal_line):
    """
    Test 1 cup phi = phi cup 1 = phi for phi the identity cochain.
    """

    # Arrange
    A = formal_line
    unit = HochschildCochain.unit(A, 3)
    identity = HochschildCochain.identity(A, 3)

    # Act
    left = cup_product(unit, identity, A)
    right = cup_product(identity, unit, A)

    # Assert
    assert left == identity
    assert right == identity
    assert left.parity == 1


def test_cup_product_needs_room_for_two_factors(Q):
    """
    Test that the cup length cap is clamped to arity_cap - 2.
    """

    A = AInfinityDeformation.formal(Q, 1, 3, 2)
    unit = HochschildCochain.unit(A, 2)
    assert cup_product(unit, unit, A).length_cap == 1


def test_insertion_of_basic_cochains(formal_line):
    """
    Test P_v on the unit, a constant and the identity cochain.
    """

    # Arrange
    A = formal_line
    v1 = A.basis_element(1)

    # Act / Assert
    assert insertion_map(HochschildCochain.unit(A, 3), A) == A.basis_element(0)
    assert insertion_map(HochschildCochain.constant(A, v1, 3), A) == v1
    assert insertion_map(HochschildCochain.identity(A, 3), A) == canonical_v(A.ring, 1, 3)


def test_cochains_vanish_on_unit_inputs(formal_line):
    """
    Test that a component on a tuple containing the unit is rejected.
    """

    A = formal_line
    with pytest.raises(InvalidInputError):
        HochschildCochain(A.ring, 1, 0, 3, {(0,): A.basis_element(0)})


def test_cochain_component_parity_is_checked(formal_line):
    """
    Test that an even cochain cannot send v1 to v1.
    """

    A = formal_line
    with pytest.raises(InvalidInputError):
        HochschildCochain(A.ring, 1, 0, 3, {(1,): A.basis_element(1)})


def test_differential_needs_arity_room(Q):
    """
    Test that d on length-L cochains needs mu^(L+1).
    """

    A = AInfinityDeformation.formal(Q, 1, 3, 3)
    with pytest.raises(ArityCapError):
        hochschild_differential(HochschildCochain.unit(A, 3), A)


def test_window_of_formal_line_matches_polyvector_fields(formal_line):
    """
    Test one class per grade and parity for E in one variable at L = 3.
    """

    # Act
    window = hh_window_complex(formal_line, 3)

    # Assert
    assert window.ranks == {(g, t): 1 for g in range(3) for t in (0, 1)}
    assert window.total_rank(0) == 3
    assert window.total_rank(1) == 3
    assert len(window.rank_table()) == 6
    assert window.certified.length == 2


def test_insertion_is_compatible_on_formal_algebra(formal_line):
    """
    Test chain-map and product compatibility of P_v for the exterior algebra.
    """

    report = hh_via_insertion(formal_line, 3)
    assert report["is_valid"], report["issues"]
    assert report["pairs_checked"] > 0


def test_insertion_is_compatible_on_minimal_model(Q):
    """
    Test P_v on the minimal model of x^2.
    """

    # Arrange
    A, _, _ = minimal_model(TruncatedSeries(Q, 1, {(2,): 1}, order=3), 5)

    # Act
    report = hh_via_insertion(A, 3)

    # Assert
    assert report["is_valid"], report["issues"]
    assert "clifford_ranks" in report


def test_constant_cochain_keeps_parity(formal_line):
    """
    Test that a constant odd cochain has odd parity.
    """

    v1 = Multivector.basis(formal_line.ring, 1, 1)
    assert HochschildCochain.constant(formal_line, v1, 3).parity == 1
