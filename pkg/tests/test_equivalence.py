import pytest

from src.algebra.diffeo import FormalDiffeo, series_compose
from src.algebra.series import TruncatedSeries, laurent_expand
from src.lmf.equivalence import (
    FOUND,
    INDETERMINATE,
    NOT_EQUIVALENT,
    potential_equivalence_search,
)
from src.shared_models import InvalidInputError, RingMismatchError

ORDER = 5


def disc_of_punctured_line(ring):
    """z + 1/z - 2 at z = 1 + x, i.e. x^2 - x^3 + x^4 - x^5."""
    return laurent_expand({(1,): 1, (-1,): 1, (0,): -2}, [1], ORDER, ring)


@pytest.mark.parametrize("ring_name", ["Q", "F3"])
def test_punctured_line_is_formal_away_from_two(request, ring_name):
    """
    Test that z + 1/z - 2 is equivalent to x^2 when 2 is invertible.
    """

    # Arrange
    ring = request.getfixturevalue(ring_name)
    P1 = disc_of_punctured_line(ring)
    P2 = TruncatedSeries.monomial(ring, 1, (2,), 1, ORDER)

    # Act
    result = potential_equivalence_search(P1, P2, d=1, order=ORDER)

    # Assert
    assert result.verdict == FOUND
    assert result.diffeo.is_identity_mod(1)
    assert series_compose(P2, result.diffeo).truncate(ORDER) == P1


def test_punctured_line_is_not_formal_in_characteristic_two(F2):
    """
    Test that the x^3 term cannot be absorbed over F_2.
    """

    # Arrange
    P1 = disc_of_punctured_line(F2)
    P2 = TruncatedSeries.monomial(F2, 1, (2,), 1, ORDER)

    # Act
    result = potential_equivalence_search(P1, P2, d=1, order=ORDER)

    # Assert
    assert result.verdict == NOT_EQUIVALENT
    assert result.diffeo is None
    assert result.nodes > 0
    assert result.report()["verdict"] == NOT_EQUIVALENT


def test_node_limit_gives_indeterminate(F2):
    """
    Test that a truncated enumeration cannot claim inequivalence.
    """

    P1 = disc_of_punctured_line(F2)
    P2 = TruncatedSeries.monomial(F2, 1, (2,), 1, ORDER)
    result = potential_equivalence_search(P1, P2, d=1, order=ORDER, node_limit=1)
    assert result.verdict == INDETERMINATE


def test_equal_potentials_use_the_identity(Q):
    """
    Test that P1 = P2 is witnessed by f = id.
    """

    P = TruncatedSeries(Q, 2, {(2, 0): 1, (0, 2): 1, (1, 2): 3}, order=4)
    result = potential_equivalence_search(P, P, d=1)
    assert result.found
    assert result.diffeo.is_identity_mod(4)


def test_partials_of_different_orders(Q):
    """
    Test x1^2 + x2^3 against its pullback along (x1, x2 + x2^2/3) over Q.

    The two partials start in degrees 1 and 2, so the correction to x2 at
    degree 4 has degree 2.
    """

    # Arrange
    P2 = TruncatedSeries(Q, 2, {(2, 0): 1, (0, 3): 1}, order=4)
    f = FormalDiffeo([TruncatedSeries.variable(Q, 2, 0, 4),
                      TruncatedSeries(Q, 2, {(0, 1): 1, (0, 2): "1/3"}, order=4)])
    P1 = series_compose(P2, f).truncate(4)

    # Act
    result = potential_equivalence_search(P1, P2, d=1, order=4)

    # Assert
    assert result.verdict == FOUND
    assert result.diffeo.is_identity_mod(1)
    assert series_compose(P2, result.diffeo).truncate(4) == P1

def test_linear_rescaling_when_d_is_zero(Q):
    """
    Test 4 x^2 = (2x)^2 and that 2 x^2 is not a rational rescaling of x^2.
    """

    # Arrange
    x2 = TruncatedSeries(Q, 1, {(2,): 1}, order=3)
    four = TruncatedSeries(Q, 1, {(2,): 4}, order=3)
    two = TruncatedSeries(Q, 1, {(2,): 2}, order=3)

    # Act
    scaled = potential_equivalence_search(four, x2, d=0)
    irrational = potential_equivalence_search(two, x2, d=0)

    # Assert
    assert scaled.verdict == FOUND
    assert abs(scaled.diffeo.linear_part()[0][0]) == 2
    assert irrational.verdict == NOT_EQUIVALENT


def test_d_zero_over_finite_field(F3):
    """
    Test that 2 x^2 and x^2 differ by a non-square over F_3.
    """

    x2 = TruncatedSeries(F3, 1, {(2,): 1}, order=3)
    two = TruncatedSeries(F3, 1, {(2,): 2}, order=3)
    assert potential_equivalence_search(two, x2, d=0).verdict == NOT_EQUIVALENT


def test_search_rejects_mixed_rings(Q, F3):
    """
    Test that potentials over different rings are refused.
    """

    with pytest.raises(RingMismatchError):
        potential_equivalence_search(TruncatedSeries(Q, 1, {(2,): 1}, order=3),
                                     TruncatedSeries(F3, 1, {(2,): 1}, order=3))


@pytest.mark.parametrize(
    "terms,d",
    [({(2,): 1}, -1), ({(1,): 1, (2,): 1}, 1)],
)
def test_search_input_errors(Q, terms, d):
    """
    Test negative d and potentials outside m^2.
    """

    P = TruncatedSeries(Q, 1, terms, order=3)
    with pytest.raises(InvalidInputError):
        potential_equivalence_search(P, TruncatedSeries(Q, 1, {(2,): 1}, order=3), d=d)


def test_search_needs_an_order(Q):
    """
    Test that two exact potentials without an order are refused.
    """

    P = TruncatedSeries(Q, 1, {(2,): 1})
    with pytest.raises(InvalidInputError):
        potential_equivalence_search(P, P)
