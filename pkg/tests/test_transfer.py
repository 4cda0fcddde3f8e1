from src.algebra.series import TruncatedSeries
from src.mf.factorization import stabilize_skyscraper
from src.transfer.homotopy import build_transfer, check_cocycles, check_transfer
from src.transfer.minimal_model import check_projection, clifford_check, minimal_model


def test_transfer_identities_in_one_variable(Q):
    """
    Test the contraction identities for w = x^2 + x^3 at order 4.
    """

    # Arrange
    X = stabilize_skyscraper(TruncatedSeries(Q, 1, {(2,): 1, (3,): 1}, order=4))

    # Act
    T = build_transfer(X)

    # Assert
    assert check_cocycles(T.cocycles)["is_valid"]
    assert check_transfer(T)["is_valid"]


def test_transfer_identities_in_two_variables(F3):
    """
    Test the contraction identities for a two-variable potential over F_3.
    """

    X = stabilize_skyscraper(TruncatedSeries(F3, 2, {(1, 1): 1, (0, 3): 1}, order=3))
    assert check_transfer(build_transfer(X), sample=12)["is_valid"]


def test_clifford_constants_of_negative_square(Q):
    """
    Test that w = -x^2 gives v v = 1 in the cohomology algebra.
    """

    w = TruncatedSeries(Q, 1, {(2,): -1}, order=3)
    A, _, _ = minimal_model(w, 4)
    report = clifford_check(A, w)
    assert report["is_valid"]
    assert report["clifford_constants"] == [["1"]]


def test_clifford_constants_in_characteristic_two(F2):
    """
    Test that x^2 over F_2 still gives a nondegenerate Clifford form.
    """

    w = TruncatedSeries(F2, 1, {(2,): 1}, order=3)
    A, _, _ = minimal_model(w, 4)
    report = clifford_check(A, w)
    assert report["is_valid"]
    assert report["clifford_constants"] == [["1"]]


def test_projection_morphism_equations(Q):
    """
    Test the morphism equations of Pi on iota-images and the unit.
    """

    # Arrange
    w = TruncatedSeries(Q, 1, {(2,): 1, (3,): 1}, order=4)
    _, Pi, T = minimal_model(w, 4)
    inputs = [T.iota[m] for m in sorted(T.iota)]

    # Act
    report = check_projection(Pi, inputs, max_arity=2)

    # Assert
    assert report["is_valid"]


def test_transfer_report_states_side_condition_window(Q):
    """
    Test that the report states the shorter window for eta^2 = 0 and no repair.
    """

    # Arrange
    X = stabilize_skyscraper(TruncatedSeries(Q, 1, {(2,): 1, (3,): 1}, order=5))

    # Act
    report = check_transfer(build_transfer(X))

    # Assert
    assert report["certified"]["order"] == 4
    assert report["side_condition_order"] == 3
    assert report["eta_repair"] is None


def test_side_condition_repair_is_named_in_report(Q, mocker, caplog):
    """
    Test that a failed eta^2 check switches to the repaired homotopy and says so.
    """

    # Arrange
    mocker.patch("src.transfer.homotopy._eta_squares_to_zero", return_value=False)
    X = stabilize_skyscraper(TruncatedSeries(Q, 1, {(2,): 1, (3,): 1}, order=4))

    # Act
    T = build_transfer(X)
    report = check_transfer(T)

    # Assert
    assert T.repaired
    assert report["eta_repair"] == "-eta mu^1 eta"
    assert "-eta mu^1 eta" in caplog.text
