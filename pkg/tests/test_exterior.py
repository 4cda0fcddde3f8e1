import numpy as np
import pytest

from src.algebra.exterior import (
    Covector,
    Multivector,
    basis_masks,
    canonical_v,
    contract,
    grade,
    indices_to_mask,
    mask_to_indices,
    wedge_sign,
)
from src.algebra.series import TruncatedSeries, random_series


def test_basis_order_is_by_size_then_lexicographic():
    """
    Test the subset basis order 1, v1, v2, v3, v12, v13, v23, v123.
    """

    masks = basis_masks(3)
    assert [mask_to_indices(m) for m in masks] == [
        [], [1], [2], [3], [1, 2], [1, 3], [2, 3], [1, 2, 3]
    ]


def test_indices_round_trip_and_repeats():
    """
    Test 1-based index conversion and the repeated-generator error.
    """

    assert indices_to_mask([1, 3]) == 0b101
    with pytest.raises(ValueError):
        indices_to_mask([2, 2])


def test_wedge_signs():
    """
    Test that v1 ^ v2 = v12 and v2 ^ v1 = -v12, and overlaps vanish.
    """

    assert wedge_sign(0b01, 0b10) == 1
    assert wedge_sign(0b10, 0b01) == -1
    assert wedge_sign(0b11, 0b01) == 0


def test_wedge_is_graded_commutative(Q):
    """
    Test that odd elements anticommute and square to zero.
    """

    v1 = Multivector.basis(Q, 2, 0b01)
    v2 = Multivector.basis(Q, 2, 0b10)
    assert v1.wedge(v2) == -v2.wedge(v1)
    assert v1.wedge(v1).is_zero()


def test_interior_signs(Q):
    """
    Test the contraction signs on v12.
    """

    v12 = Multivector.basis(Q, 2, 0b11)
    assert v12.interior(0) == Multivector.basis(Q, 2, 0b10)
    assert v12.interior(1) == -Multivector.basis(Q, 2, 0b01)


def test_contracting_the_canonical_element(Q):
    """
    Test that (c1, c2) contracted into x1 v1 + x2 v2 is c1 x1 + c2 x2.
    """

    # Arrange
    x1 = TruncatedSeries.variable(Q, 2, 0)
    x2 = TruncatedSeries.variable(Q, 2, 1)
    v = canonical_v(Q, 2)

    # Act
    result = contract(Covector([x2, x1]), v)

    # Assert
    assert result == Multivector.scalar(Q, 2, x1 * x2 + x2 * x1)


def test_parity_of_mixed_element_is_an_error(Q):
    """
    Test that parity is only defined on homogeneous elements.
    """

    mixed = Multivector.basis(Q, 1, 0) + Multivector.basis(Q, 1, 1)
    with pytest.raises(ValueError):
        mixed.parity()
    assert mixed.parity_part(1) == Multivector.basis(Q, 1, 1)


def random_multivector(rng, ring, nvars, order, parity):
    """Random homogeneous multivector with series coefficients."""
    return Multivector(ring, nvars, {
        m: random_series(rng, ring, nvars, order)
        for m in basis_masks(nvars) if grade(m) % 2 == parity
    })


def random_covector(rng, ring, nvars, order):
    return Covector([random_series(rng, ring, nvars, order) for _ in range(nvars)])


@pytest.mark.parametrize("ring_name", ["Q", "F2", "F3"])
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_contraction_squares_to_zero(request, ring_name, seed):
    """
    Test c -| (c -| a) = 0 for random c and a.
    """

    ring = request.getfixturevalue(ring_name)
    rng = np.random.default_rng(seed)
    c = random_covector(rng, ring, 3, 3)
    for parity in (0, 1):
        a = random_multivector(rng, ring, 3, 3, parity)
        assert contract(c, contract(c, a)).is_zero()


@pytest.mark.parametrize("ring_name", ["Q", "F3"])
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_contraction_is_an_odd_derivation(request, ring_name, seed):
    """
    Test c -| (a ^ b) = (c -| a) ^ b + (-1)^|a| a ^ (c -| b).
    """

    ring = request.getfixturevalue(ring_name)
    rng = np.random.default_rng(seed)
    c = random_covector(rng, ring, 3, 3)
    for pa in (0, 1):
        a = random_multivector(rng, ring, 3, 3, pa)
        b = random_multivector(rng, ring, 3, 3, 1 - pa)
        lhs = contract(c, a.wedge(b))
        second = a.wedge(contract(c, b))
        rhs = contract(c, a).wedge(b) + (second if pa == 0 else -second)
        assert lhs == rhs


@pytest.mark.parametrize("seed", [0, 1])
def test_cartan_identity_for_wedge_and_contract(Q, seed):
    """
    Test c -| (u ^ a) + u ^ (c -| a) = <c, u> a for u of grade one.
    """

    # Arrange
    rng = np.random.default_rng(seed)
    c = random_covector(rng, Q, 3, 3)
    coeffs = [random_series(rng, Q, 3, 3) for _ in range(3)]
    u = Multivector(Q, 3, {1 << i: s for i, s in enumerate(coeffs)})
    pairing = sum((ci * ui for ci, ui in zip(c.coefficients, coeffs)),
                  TruncatedSeries.zero(Q, 3, 3))
    a = random_multivector(rng, Q, 3, 3, seed % 2)

    # Act
    anticommutator = contract(c, u.wedge(a)) + u.wedge(contract(c, a))

    # Assert
    assert anticommutator == a.scale(pairing)
