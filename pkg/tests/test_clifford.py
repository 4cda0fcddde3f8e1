import numpy as np
import pytest

from src.ainfinity.deformation import AInfinityDeformation
from src.algebra.exterior import Multivector
from src.algebra.series import TruncatedSeries, random_series
from src.hochschild.clifford import (
    CliffordAlgebra,
    clifford_complex,
    clifford_multiply,
    complex_cohomology,
    embed_and_centre_check,
    jacobian_algebra,
    theta_chain_check,
)
from src.shared_models import InvalidInputError
from src.transfer.minimal_model import minimal_model


def test_generator_squares_over_q(Q, univariate):
    """
    Test v v = -1 for P = x^2 in characteristic zero.
    """

    # Arrange
    P = univariate(Q, {2: 1}, 3)
    v = CliffordAlgebra(P).generator(0)

    # Act
    vv = clifford_multiply(v, v, P)

    # Assert
    assert vv == Multivector.scalar(Q, 1, -1)


def test_generator_squares_over_f2(F2, univariate):
    """
    Test v v = 1 + x^4 and a zero differential for P = x^2 + x^6 over F_2.
    """

    # Arrange
    P = univariate(F2, {2: 1, 6: 1}, 7)
    cl = CliffordAlgebra(P)
    v = cl.generator(0)

    # Act
    vv = cl.multiply(v, v)

    # Assert
    assert vv == Multivector.scalar(F2, 1, TruncatedSeries(F2, 1, {(0,): 1, (4,): 1}))
    assert cl.differential(v).is_zero()


def test_zero_differential_keeps_the_whole_truncation(F2, univariate):
    """
    Test that dP = 0 over F_2 leaves all 2 x 7 basis elements in cohomology.
    """

    H = complex_cohomology(clifford_complex(univariate(F2, {2: 1, 6: 1}, 7)))
    assert H.window == (6, 6)
    assert H.total_rank() == 14


def test_anticommutator_in_two_variables(Q):
    """
    Test v1 v2 + v2 v1 = -d1 d2 P for P = x1 x2.
    """

    # Arrange
    P = TruncatedSeries(Q, 2, {(1, 1): 1}, order=3)
    cl = CliffordAlgebra(P)
    v1, v2 = cl.generator(0), cl.generator(1)

    # Act
    anti = cl.multiply(v1, v2) + cl.multiply(v2, v1)

    # Assert
    assert anti == Multivector.scalar(Q, 2, -1)
    assert cl.multiply(v1, v1).is_zero()


@pytest.mark.parametrize(
    "coeffs,order,expected",
    [({3: 1}, 4, 2), ({2: 1}, 3, 1), ({}, 3, 3)],
)
def test_jacobian_ranks(Q, univariate, coeffs, order, expected):
    """
    Test dim R/(P') truncated at m^N for a few one-variable potentials.
    """

    assert jacobian_algebra(univariate(Q, coeffs, order)).rank == expected


def test_jacobian_reduction(Q, univariate):
    """
    Test that x^2 lies in the Jacobian ideal of x^3 and x does not.
    """

    jac = jacobian_algebra(univariate(Q, {3: 1}, 5))
    x = TruncatedSeries.variable(Q, 1, 0)
    assert jac.contains(x * x)
    assert not jac.contains(x)
    assert jac.rank_by_degree() == {0: 1, 1: 1}


def test_cohomology_matches_jacobian_rank(Q, univariate):
    """
    Test total rank 2 for x^3 at N = 5, concentrated in even degree.
    """

    # Arrange
    P = univariate(Q, {3: 1}, 5)

    # Act
    H = complex_cohomology(clifford_complex(P))

    # Assert
    assert H.window == (4, 2)
    assert H.ranks == {0: 2, 1: 0}
    assert H.total_rank() == jacobian_algebra(P).rank


def test_morse_potential_has_one_class(Q):
    """
    Test that x1^2 + x2^2 gives rank one.
    """

    P = TruncatedSeries(Q, 2, {(2, 0): 1, (0, 2): 1}, order=4)
    assert complex_cohomology(clifford_complex(P)).total_rank() == 1


def test_zero_potential_gives_polyvector_fields(Q):
    """
    Test ranks 3 and 3 for P = 0 in one variable at N = 3.
    """

    H = complex_cohomology(clifford_complex(TruncatedSeries.zero(Q, 1, 3)))
    assert H.ranks == {0: 3, 1: 3}
    assert H.rank_table() == [
        {"grade": 0, "parity": 0, "rank": 3},
        {"grade": 1, "parity": 1, "rank": 3},
    ]


def test_complex_rejects_linear_potentials(Q, univariate):
    """
    Test that P outside m^2 is an input error.
    """

    with pytest.raises(InvalidInputError):
        clifford_complex(univariate(Q, {1: 1, 2: 1}, 3))


def test_complex_needs_finite_order(Q):
    """
    Test that an exact potential without trust order is rejected.
    """

    with pytest.raises(InvalidInputError):
        clifford_complex(TruncatedSeries(Q, 1, {(2,): 1}))


@pytest.mark.parametrize(
    "terms",
    [{(3, 0): 1, (0, 2): 1}, {(2, 0): 1, (0, 2): 1}],
)
def test_representatives_are_central(Q, terms):
    """
    Test the centre check on two-variable potentials.
    """

    report = embed_and_centre_check(TruncatedSeries(Q, 2, terms, order=4))
    assert report["is_valid"], report["issues"]
    assert report["centre_check"] == "pass"
    assert report["representatives_checked"] >= 1


def test_theta_chain_on_formal_algebra(Q):
    """
    Test that wedge products of generators are chains for P = 0.
    """

    report = theta_chain_check(AInfinityDeformation.formal(Q, 2, 4, 3))
    assert report["is_valid"], report["issues"]


def test_theta_chain_on_minimal_model(Q, univariate):
    """
    Test d_v theta(v) = P' for the minimal model of x^2 + x^3.
    """

    A, _, _ = minimal_model(univariate(Q, {2: 1, 3: 1}, 4), 5)
    report = theta_chain_check(A)
    assert report["is_valid"], report["issues"]


@pytest.mark.parametrize("ring_name", ["Q", "F3"])
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_cohomology_ignores_the_variable_order(request, ring_name, seed):
    """
    Test that P(x1, x2) and P(x2, x1) have the same cohomology ranks.
    """

    # Arrange
    ring = request.getfixturevalue(ring_name)
    P = random_series(np.random.default_rng(seed), ring, 2, 4, min_degree=2)
    reversed_P = TruncatedSeries(ring, 2, {alpha[::-1]: c for alpha, c in P.terms.items()},
                                 order=4)

    # Act
    H = complex_cohomology(clifford_complex(P))
    H_reversed = complex_cohomology(clifford_complex(reversed_P))

    # Assert
    assert H.window == H_reversed.window
    assert H.ranks == H_reversed.ranks
