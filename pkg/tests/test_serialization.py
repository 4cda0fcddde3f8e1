import json
import os
from pathlib import Path

import pytest

from src.ainfinity.relations import check_ainfinity
from src.algebra.diffeo import FormalDiffeo
from src.algebra.scalars import parse_ring
from src.algebra.series import TruncatedSeries
from src.config import Settings, load_settings, validate_job_config
from src.mf.factorization import stabilize_skyscraper
from src.serialization import (
    algebra_from_json,
    algebra_to_json,
    diffeo_from_json,
    diffeo_to_json,
    factorization_from_json,
    factorization_to_json,
    load_potential,
    read_json,
    report_to_json,
    series_from_json,
    series_to_json,
)
from src.shared_models import CertifiedWindow, InvalidInputError, JobConfig, new_report

DATA = Path(__file__).resolve().parent.parent / "data"


def test_laurent_potential_is_expanded(Q):
    """
    Test that z + 1/z - 2 loads as x^2 - x^3 + x^4 - x^5 at order 5.
    """

    # Act
    P = load_potential(DATA / "potentials" / "punctured_line.json")

    # Assert
    assert P.order == 5
    assert P == TruncatedSeries(Q, 1, {(2,): 1, (3,): -1, (4,): 1, (5,): -1})


def test_potential_is_reread_over_another_ring(F2):
    """
    Test that --ring and --order override the file header.
    """

    P = load_potential(DATA / "potentials" / "punctured_line.json", F2, 4)
    assert P.ring == F2
    assert P.order == 4
    assert P == TruncatedSeries(F2, 1, {(2,): 1, (3,): 1, (4,): 1})


def test_series_json_keeps_exact_coefficients(Q):
    """
    Test fractions survive as strings in graded-lex order.
    """

    s = TruncatedSeries(Q, 2, {(0, 2): "-3/2", (2, 0): 1, (1, 1): 5}, order=3)
    data = series_to_json(s)
    assert [t["coeff"] for t in data["terms"]] == ["1", "5", "-3/2"]
    assert series_from_json(data) == s
    assert series_from_json(data).order == 3


def test_bad_coefficient_is_an_input_error():
    """
    Test that 1/2 cannot be read over F_2.
    """

    data = {"ring": {"kind": "Fp", "p": 2}, "vars": 1, "terms": [{"exp": [2], "coeff": "1/2"}]}
    with pytest.raises(InvalidInputError):
        series_from_json(data)


def test_algebra_fixture_survives_a_round_trip():
    """
    Test that the formal algebra file reloads to the same operations.
    """

    # Arrange
    A = algebra_from_json(read_json(DATA / "algebras" / "formal_n2.json"))

    # Act
    B = algebra_from_json(json.loads(json.dumps(algebra_to_json(A))))

    # Assert
    assert A.ops.keys() == B.ops.keys()
    assert all(A.ops[k] == B.ops[k] for k in A.ops)
    assert check_ainfinity(B)["is_valid"]


def test_corrupted_fixture_loads_but_is_not_ainfinity():
    """
    Test that unitality passes while the A-infinity relations fail.
    """

    A = algebra_from_json(read_json(DATA / "algebras" / "corrupted_n2.json"))
    report = check_ainfinity(A)
    assert not report["is_valid"]
    assert len(report["first_failure"]) == 3


def test_algebra_with_wrong_arity_field():
    """
    Test that an op whose k disagrees with its inputs is rejected.
    """

    data = read_json(DATA / "algebras" / "formal_n2.json")
    data["ops"][0]["k"] = 3
    with pytest.raises(InvalidInputError):
        algebra_from_json(data)


def test_factorization_and_diffeo_json(Q):
    """
    Test the matrix and component formats.
    """

    X = stabilize_skyscraper(TruncatedSeries(Q, 1, {(2,): 1, (3,): 1}, order=4))
    Y = factorization_from_json(factorization_to_json(X))
    assert Y.check()["is_valid"]
    assert Y.differential.terms == X.differential.terms

    f = FormalDiffeo([TruncatedSeries(Q, 1, {(1,): 1, (2,): "1/3"}, order=4)])
    assert diffeo_from_json(diffeo_to_json(f)) == f


def test_report_carries_version_and_window():
    """
    Test that reports gain a version and the certified window.
    """

    data = report_to_json(new_report(), CertifiedWindow(order=4, arity=5))
    assert data["certified"] == {"order": 4, "arity": 5}
    assert "version" in data
    assert data["is_valid"] is True


def test_missing_and_malformed_files(tmp_path):
    """
    Test that unreadable inputs are input errors.
    """

    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(InvalidInputError):
        read_json(bad)
    with pytest.raises(InvalidInputError):
        read_json(tmp_path / "missing.json")


def test_settings_from_environment(mocker):
    """
    Test AINF_* overrides on top of defaults.json.
    """

    # Arrange
    mocker.patch("src.config.load_dotenv")
    mocker.patch.dict(os.environ, {"AINF_MAX_VARS": "3", "AINF_LOG_LEVEL": "debug"})

    # Act
    settings = load_settings()

    # Assert
    assert settings.max_vars == 3
    assert settings.log_level == "DEBUG"
    assert settings.max_order == 12


def test_settings_reject_bad_integers(mocker):
    """
    Test that a non-integer override is an input error.
    """

    mocker.patch("src.config.load_dotenv")
    mocker.patch.dict(os.environ, {"AINF_NODE_LIMIT": "lots"})
    with pytest.raises(InvalidInputError):
        load_settings()


def test_guard_rails_and_force(caplog):
    """
    Test that n and N above the limits need --force.
    """

    # Arrange
    settings = Settings(max_vars=2, max_order=4)
    config = JobConfig(ring="Q", nvars=3, order=5, arity=6)

    # Act / Assert
    with pytest.raises(InvalidInputError):
        validate_job_config(config, settings)
    config.force = True
    validate_job_config(config, settings)
    assert "Guard rail overridden" in caplog.text


def test_arity_must_cover_order_for_potential_jobs():
    """
    Test K >= N for jobs that read disc potentials.
    """

    config = JobConfig(ring="Q", order=5, arity=4)
    with pytest.raises(InvalidInputError):
        validate_job_config(config, Settings(), needs_potential=True)
    validate_job_config(config, Settings())


def test_ring_spec_round_trip():
    """
    Test that ring headers reload to the same ring.
    """

    ring = parse_ring("Fp:5")
    assert parse_ring(ring.to_json()) == ring
