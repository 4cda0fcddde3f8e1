import numpy as np
import pytest

from src.ainfinity.deformation import AInfinityDeformation
from src.ainfinity.morphisms import check_d_equivalence, pushforward, random_gr_identity_diffeo
from src.ainfinity.potential import disc_potential
from src.ainfinity.relations import check_ainfinity, check_superfiltered_unital
from src.algebra.series import TruncatedSeries, random_series
from src.hochschild.cochains import hh_window_complex
from src.lmf.pipeline import composite_equivalence
from src.mf.factorization import MfMorphism, hom_differential
from src.transfer.homotopy import check_cocycles, check_transfer
from src.transfer.minimal_model import clifford_check, minimal_model

# (nvars, order, arity cap, homotopy sample); larger n runs at a smaller order
TRANSFER_SIZES = [(1, 5, 5, None), (2, 4, 4, 24), (3, 3, 3, 16)]


def random_potential(ring, nvars, order, seed):
    """Random w in m^2, falling back to x1^2 when every coefficient vanishes."""
    w = random_series(np.random.default_rng(seed), ring, nvars, order, min_degree=2)
    if w.is_zero():
        w = TruncatedSeries.monomial(ring, nvars, (2,) + (0,) * (nvars - 1), 1, order)
    return w


@pytest.mark.parametrize("ring_name", ["Q", "F2", "F3"])
@pytest.mark.parametrize("nvars,order,cap,sample", TRANSFER_SIZES)
@pytest.mark.parametrize("seed", [0, 1])
def test_minimal_model_of_random_potential(request, ring_name, nvars, order, cap, sample, seed):
    """
    Test relations, unitality, the disc potential and the Clifford part of a random minimal model.
    """

    # Arrange
    ring = request.getfixturevalue(ring_name)
    w = random_potential(ring, nvars, order, seed)

    # Act
    A, _, T = minimal_model(w, cap)

    # Assert
    assert check_ainfinity(A)["is_valid"]
    assert check_superfiltered_unital(A)["is_valid"]
    assert disc_potential(A, order) == w
    assert clifford_check(A, w)["is_valid"]
    assert check_cocycles(T.cocycles)["is_valid"]
    report = check_transfer(T, sample=sample, seed=seed)
    assert report["is_valid"], report["issues"]


@pytest.mark.parametrize("nvars,terms", [
    (1, {(2,): 1, (3,): 1}),
    (2, {(1, 1): 1, (0, 3): 1}),
])
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_pipeline_after_random_pushforward(Q, nvars, terms, seed):
    """
    Test the composite equivalence on the pushforward of a minimal model along a random diffeo.
    """

    # Arrange
    order, cap = 4, 5
    w = TruncatedSeries(Q, nvars, terms, order=order)
    A, _, _ = minimal_model(w, cap)
    delta = random_gr_identity_diffeo(A, seed=seed)
    B = pushforward(A, delta)

    # Act
    result = composite_equivalence(B, order - 1)

    # Assert
    assert check_ainfinity(B)["is_valid"]
    assert check_d_equivalence(delta.with_target(B), max_arity=4)["is_valid"]
    assert disc_potential(B, order) == w
    assert result.report["is_valid"], result.report["issues"]
    assert result.mirror.check()["is_valid"]
    assert hom_differential(result.cocycle).is_zero()
    assert (result.cocycle.compose(result.inverse)
            - MfMorphism.identity(result.skyscraper)).is_zero()


@pytest.mark.parametrize("ring_name", ["Q", "F3"])
def test_hkr_ranks_in_two_variables(request, ring_name):
    """
    Test that formal E on two generators has rank 2(g + 1) in every grade and parity.
    """

    # Arrange
    ring = request.getfixturevalue(ring_name)
    A = AInfinityDeformation.formal(ring, 2, 5, 3)

    # Act
    window = hh_window_complex(A, 3)

    # Assert
    assert window.ranks == {(g, t): 2 * (g + 1) for g in range(3) for t in (0, 1)}
