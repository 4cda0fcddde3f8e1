import pytest

from src.algebra.series import TruncatedSeries
from src.lmf.pipeline import (
    check_yoneda,
    comparison_cocycle,
    composite_equivalence,
    yoneda_morphism,
)
from src.mf.factorization import MfMorphism, hom_differential, stabilize_skyscraper
from src.mf.mirror import mirror_object
from src.shared_models import VerificationError
from src.transfer.minimal_model import minimal_model


@pytest.fixture
def square_model(Q):
    """Minimal model of x^2 at order 3 with arity cap 4."""
    A, _, _ = minimal_model(TruncatedSeries(Q, 1, {(2,): 1}, order=3), 4)
    return A


def test_comparison_cocycle_is_invertible(square_model):
    """
    Test that i: E_A -> E0 is a cocycle with a two-sided inverse.
    """

    # Arrange
    E = mirror_object(square_model, 2)
    E0 = stabilize_skyscraper(E.potential)

    # Act
    i, inverse = comparison_cocycle(E, E0)

    # Assert
    assert hom_differential(i).is_zero()
    assert (i.compose(inverse) - MfMorphism.identity(E0)).is_zero()
    assert (inverse.compose(i) - MfMorphism.identity(E)).is_zero()


def test_comparison_needs_matching_potentials(Q):
    """
    Test that factorisations of different potentials cannot be compared.
    """

    E = stabilize_skyscraper(TruncatedSeries(Q, 1, {(2,): 1}, order=3))
    E0 = stabilize_skyscraper(TruncatedSeries(Q, 1, {(2,): 2}, order=3))
    with pytest.raises(VerificationError):
        comparison_cocycle(E, E0)


def test_yoneda_morphism_equations(square_model):
    """
    Test the morphism equations and unitality of Phi: A -> end(E_A).
    """

    Phi = yoneda_morphism(square_model, 2)
    report = check_yoneda(Phi, max_arity=2)
    assert report["is_valid"], report["issues"]


def test_composite_is_an_equivalence(square_model):
    """
    Test that Pi o Psi o Phi is an infinity-equivalence for the minimal model of x^2.
    """

    # Act
    result = composite_equivalence(square_model, 2)

    # Assert
    assert result.report["is_valid"], result.report["issues"]
    assert result.report["certified"]["arity"] == 3
    assert result.mirror.same_potential(result.skyscraper)
    assert result.minimal_model.arity_cap == 3
