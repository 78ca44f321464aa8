"""
Tests for the command line interface.
"""

import json

import pytest

from app.cli import main
from app.services.sweep_service import CSV_COLUMNS


@pytest.fixture
def config_path(tmp_path, document):
    path = tmp_path / "experiment.env"
    path.write_text(document)
    return str(path)


def test_analytic_to_stdout(config_path, capsys):
    assert main(["analytic", "--config", config_path]) == 0
    lines = capsys.readouterr().out.splitlines()
    data = [line for line in lines if not line.startswith("#")]
    assert data[0] == ",".join(CSV_COLUMNS)
    assert len(data) == 8
    assert all(line.startswith("poisson_analytic,") for line in data[1:])


def test_simulate_to_file(config_path, tmp_path, capsys):
    output = tmp_path / "results" / "mc.csv"
    assert main(["simulate", "--config", config_path, "--output", str(output), "--snapshots", "100"]) == 0
    assert capsys.readouterr().out == ""
    text = output.read_text()
    assert "# seed: 11" in text
    assert "poisson_mc," in text


def test_seed_override_in_provenance(config_path, capsys):
    assert main(["simulate", "--config", config_path, "--seed", "5", "--snapshots", "50"]) == 0
    assert "# seed: 5" in capsys.readouterr().out


def test_bad_config_exit_status(tmp_path, capsys):
    path = tmp_path / "bad.env"
    path.write_text("DENSITY_PER_M2=1e-6\nNOISE_DBM=off\nPATHLOSS_GAMMA=2\n")
    assert main(["analytic", "--config", str(path)]) == 2
    error = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert error["type"] == "ConfigError"
    assert error["key"] == "pathloss_gamma"


def test_missing_config_file(tmp_path, capsys):
    assert main(["analytic", "--config", str(tmp_path / "absent.env")]) == 2
    assert "FileNotFoundError" in capsys.readouterr().err


def test_compare_from_rows(tmp_path, capsys):
    rows = tmp_path / "rows.csv"
    header = ",".join(CSV_COLUMNS)
    rows.write_text(
        "# version: test\n"
        + header
        + "\n"
        + "poisson_analytic,threshold_db,0,0,4,1,1,0.2,,,,\n"
        + "poisson_analytic,threshold_db,10,10,4,1,1,0.8,,,,\n"
        + "hexagonal_mc,threshold_db,0,0,4,1,1,0.1,0.01,,,\n"
        + "hexagonal_mc,threshold_db,10,10,4,1,1,0.6,0.01,,,\n"
    )
    assert main(["compare", "--rows", str(rows)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["reference_threshold_db"] == pytest.approx(5.0)
    assert report["baseline_threshold_db"] == pytest.approx(8.0)
    assert report["gap_db"] == pytest.approx(3.0)


def test_compare_without_baseline_fails(config_path, capsys):
    assert main(["compare", "--config", config_path, "--baseline", "poisson_mc", "--level", "0.99"]) == 2
    assert "NotBracketedError" in capsys.readouterr().err
