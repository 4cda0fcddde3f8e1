from fractions import Fraction

import numpy as np
import pytest

from src.algebra.diffeo import FormalDiffeo, diffeo_compose, diffeo_invert, series_compose
from src.algebra.linalg import ideal_solve, invert_matrix
from src.algebra.scalars import GroundRing, parse_ring, rational_root
from src.algebra.series import (
    TruncatedSeries,
    format_series,
    half_hessian,
    laurent_expand,
    partial_derivative,
    random_series,
)
from src.shared_models import InvalidInputError, NotInvertibleError, RingMismatchError


def test_parse_ring_accepts_q_and_prime_fields():
    """
    Test that ring specifications parse to the expected ground rings.
    """

    assert parse_ring("Q") == GroundRing("Q")
    assert parse_ring("Fp:7") == GroundRing("Fp", 7)
    assert parse_ring({"kind": "Fp", "p": 3}).characteristic == 3


@pytest.mark.parametrize("spec", ["Fp:4", "Z", "Fp:x"])
def test_parse_ring_rejects_bad_specs(spec):
    """
    Test that non-prime moduli and unknown kinds are input errors.
    """

    with pytest.raises(InvalidInputError):
        parse_ring(spec)


def test_fraction_with_vanishing_denominator_is_not_invertible(F2):
    """
    Test that 1/2 has no image in F_2.
    """

    with pytest.raises(NotInvertibleError):
        F2.element("1/2")


def test_truncation_drops_high_degrees(Q, univariate):
    """
    Test that products forget everything above the trust order.
    """

    # Arrange
    s = univariate(Q, {1: 1, 2: 1}, order=3)

    # Act
    square = s * s

    # Assert
    assert square == univariate(Q, {2: 1, 3: 2}, order=3)
    assert square.order == 3


def test_series_inverse(Q, univariate):
    """
    Test that (1 - x)^-1 = 1 + x + x^2 + x^3 modulo m^4.
    """

    s = univariate(Q, {0: 1, 1: -1}, order=3)
    assert s.inverse() == univariate(Q, {0: 1, 1: 1, 2: 1, 3: 1}, order=3)


def test_inverse_of_non_unit_fails(Q, univariate):
    """
    Test that a series without constant term is not invertible.
    """

    with pytest.raises(NotInvertibleError):
        univariate(Q, {1: 1}, order=3).inverse()


def test_mixing_variable_counts_is_rejected(Q):
    """
    Test that series in different numbers of variables do not combine.
    """

    with pytest.raises(RingMismatchError):
        TruncatedSeries.variable(Q, 1, 0) + TruncatedSeries.variable(Q, 2, 0)


def test_diffeo_invert(Q, univariate):
    """
    Test the inverse of x -> x + x^2 modulo m^5.
    """

    # Arrange
    f = FormalDiffeo([univariate(Q, {1: 1, 2: 1}, order=4)])

    # Act
    g = diffeo_invert(f)

    # Assert
    assert g.components[0] == univariate(Q, {1: 1, 2: -1, 3: 2, 4: -5}, order=4)
    assert diffeo_compose(f, g) == FormalDiffeo.identity(Q, 1, 4)


def test_series_compose_over_q_and_f2(Q, F2, univariate):
    """
    Test that x^2 o (x + x^2) loses its cross term in characteristic 2.
    """

    for ring, expected in ((Q, {2: 1, 3: 2, 4: 1}), (F2, {2: 1, 4: 1})):
        P = univariate(ring, {2: 1})
        f = FormalDiffeo([univariate(ring, {1: 1, 2: 1}, order=4)])
        assert series_compose(P, f) == univariate(ring, expected, order=4)


def test_laurent_expansion_at_one(Q, univariate):
    """
    Test that z + 1/z - 2 at z = 1 + x expands to x^2 - x^3 + x^4.
    """

    P = laurent_expand({(1,): 1, (-1,): 1, (0,): -2}, [1], 4, Q)
    assert P == univariate(Q, {2: 1, 3: -1, 4: 1}, order=4)


def test_laurent_expansion_needs_invertible_rho(Q):
    """
    Test that a zero expansion point is rejected.
    """

    with pytest.raises(NotInvertibleError):
        laurent_expand({(1,): 1}, [0], 3, Q)


def test_half_hessian_diagonal_uses_binomials(Q, F2, univariate):
    """
    Test that the diagonal of the half Hessian of x^4 is 6 x^2, also in characteristic 2.
    """

    assert half_hessian(univariate(Q, {4: 1}))[0][0] == univariate(Q, {2: 6})
    assert half_hessian(univariate(F2, {2: 1}))[0][0] == univariate(F2, {0: 1})


def test_partial_derivative_lowers_order(Q):
    """
    Test that differentiation drops the trust order by one.
    """

    P = TruncatedSeries(Q, 2, {(2, 1): 3, (0, 3): 1}, order=5)
    d = partial_derivative(P, 0)
    assert d == TruncatedSeries(Q, 2, {(1, 1): 6}, order=4)
    assert d.order == 4


def test_format_series(Q):
    """
    Test the human-readable rendering.
    """

    P = TruncatedSeries(Q, 2, {(2, 0): 1, (1, 1): Fraction(-3, 2)})
    assert format_series(P) == "x1^2 - 3/2*x1*x2"


def test_ideal_solve_particular_and_kernel(Q):
    """
    Test x1 x2 = c1 x1 + c2 x2 in degree 2 with its one-dimensional kernel.
    """

    # Arrange
    x1 = TruncatedSeries.variable(Q, 2, 0)
    x2 = TruncatedSeries.variable(Q, 2, 1)

    # Act
    particular, kernel = ideal_solve(x1 * x2, [x1, x2], 2)

    # Assert
    assert particular[0] * x1 + particular[1] * x2 == x1 * x2
    assert particular == [x2, TruncatedSeries.zero(Q, 2)]
    assert len(kernel) == 1
    assert kernel[0][0] * x1 + kernel[0][1] * x2 == 0


def test_ideal_solve_inconsistent(Q):
    """
    Test that x^2 is not a multiple of x^3 in degree 2.
    """

    x = TruncatedSeries.variable(Q, 1, 0)
    assert ideal_solve(x * x, [x * x * x], 2) is None


def test_invert_matrix_over_f3(F3):
    """
    Test Gauss-Jordan inversion modulo 3.
    """

    inverse = invert_matrix(F3, [[1, 1], [0, 2]])
    assert inverse == [[1, 1], [0, 2]]


def test_singular_matrix_is_rejected(Q):
    """
    Test that a singular linear part is reported.
    """

    with pytest.raises(NotInvertibleError):
        invert_matrix(Q, [[1, 2], [2, 4]])


def test_rational_root():
    """
    Test exact rational k-th roots.
    """

    assert sorted(rational_root(Fraction(4, 9), 2)) == [Fraction(-2, 3), Fraction(2, 3)]
    assert rational_root(Fraction(2), 2) == []


def random_gr_identity(rng, ring, nvars, order):
    """x_i + (random terms of degree >= 2)."""
    return FormalDiffeo([
        TruncatedSeries.variable(ring, nvars, i, order)
        + random_series(rng, ring, nvars, order, min_degree=2)
        for i in range(nvars)
    ])


@pytest.mark.parametrize("ring_name", ["Q", "F2", "F3"])
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_series_ring_axioms(request, ring_name, seed):
    """
    Test commutativity, associativity and distributivity on random series.
    """

    # Arrange
    ring = request.getfixturevalue(ring_name)
    rng = np.random.default_rng(seed)
    a, b, c = (random_series(rng, ring, 2, 4) for _ in range(3))
    one = TruncatedSeries.one(ring, 2, 4)

    # Assert
    assert a + b == b + a
    assert (a + b) + c == a + (b + c)
    assert a * b == b * a
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert (a - a).is_zero()
    assert a * one == a


def test_trust_order_propagation(Q):
    """
    Test that sums and products keep the smaller order and derivatives drop it by one.
    """

    rng = np.random.default_rng(7)
    a = random_series(rng, Q, 2, 5)
    b = random_series(rng, Q, 2, 3)
    exact = TruncatedSeries(Q, 2, {(1, 1): 1})
    assert (a + b).order == 3
    assert (a * b).order == 3
    assert (a * exact).order == 5
    assert exact.order is None
    assert partial_derivative(a, 0).order == 4
    assert series_compose(a, random_gr_identity(rng, Q, 2, 3)).order == 3


@pytest.mark.parametrize("ring_name", ["Q", "F3"])
@pytest.mark.parametrize("seed", [0, 1])
def test_leibniz_rule_for_partial_derivatives(request, ring_name, seed):
    """
    Test d_i(a b) = d_i(a) b + a d_i(b).
    """

    ring = request.getfixturevalue(ring_name)
    rng = np.random.default_rng(seed)
    a, b = random_series(rng, ring, 3, 4), random_series(rng, ring, 3, 4)
    for i in range(3):
        lhs = partial_derivative(a * b, i)
        rhs = partial_derivative(a, i) * b + a * partial_derivative(b, i)
        assert lhs == rhs


@pytest.mark.parametrize("ring_name", ["Q", "F3"])
@pytest.mark.parametrize("nvars", [2, 3])
def test_composition_is_associative(request, ring_name, nvars):
    """
    Test P o (f o g) = (P o f) o g and (f o g) o h = f o (g o h).
    """

    # Arrange
    ring = request.getfixturevalue(ring_name)
    rng = np.random.default_rng(nvars)
    P = random_series(rng, ring, nvars, 4, min_degree=2)
    f, g, h = (random_gr_identity(rng, ring, nvars, 4) for _ in range(3))

    # Assert
    assert series_compose(P, diffeo_compose(f, g)) == series_compose(series_compose(P, f), g)
    assert diffeo_compose(diffeo_compose(f, g), h) == diffeo_compose(f, diffeo_compose(g, h))


@pytest.mark.parametrize("ring_name", ["Q", "F3"])
@pytest.mark.parametrize("nvars", [2, 3])
def test_inverse_on_both_sides(request, ring_name, nvars):
    """
    Test f^-1 o f = f o f^-1 = id for a change of variables with a non-trivial linear part.
    """

    # Arrange
    ring = request.getfixturevalue(ring_name)
    rng = np.random.default_rng(10 + nvars)
    shear = [[1 if i == j else (1 if j == i + 1 else 0) for j in range(nvars)]
             for i in range(nvars)]
    f = diffeo_compose(FormalDiffeo.linear(ring, shear, 4), random_gr_identity(rng, ring, nvars, 4))
    identity = FormalDiffeo.identity(ring, nvars, 4)

    # Act
    g = diffeo_invert(f)

    # Assert
    assert diffeo_compose(g, f) == identity
    assert diffeo_compose(f, g) == identity
