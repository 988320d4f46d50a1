import json

import pytest
from click.testing import CliRunner

from nestcast.cli import EXIT_VALIDATION, main
from nestcast.model import model_to_dict, save_model

from conftest import noisy_binary


@pytest.fixture
def model_file(tmp_path):
    path = tmp_path / "model.json"
    save_model(noisy_binary(1), path)
    return str(path)


def run(*args):
    return CliRunner().invoke(main, list(args))


def test_validate_ok(model_file):
    result = run("validate", model_file)
    assert result.exit_code == 0
    assert result.output.startswith("ok ")


def test_validate_rejects_bad_model(tmp_path):
    path = tmp_path / "bad.json"
    raw = model_to_dict(noisy_binary(1))
    raw["source"]["initial"][0] = "9/10"
    path.write_text(json.dumps(raw))
    result = run("validate", str(path))
    assert result.exit_code == EXIT_VALIDATION


def test_solve_reports_agreement(model_file, tmp_path):
    out = tmp_path / "strategy.json"
    result = run("solve", model_file, "--save-strategy", str(out))
    assert result.exit_code == 0, result.output
    assert "agreement: yes" in result.output
    assert "dp cost: 3/5" in result.output
    assert out.exists()


def test_simulate_round_trip(model_file, tmp_path):
    out = tmp_path / "strategy.json"
    run("solve", model_file, "--save-strategy", str(out))
    csv = tmp_path / "report.csv"
    result = run(
        "simulate", model_file, str(out), "--samples", "2000", "--seed", "7",
        "--csv", str(csv),
    )
    assert result.exit_code == 0, result.output
    assert "exact cost: 3/5" in result.output
    assert csv.exists() and csv.read_text().count("\n") == 3


def test_falsify_exit_codes(model_file):
    result = run("falsify", model_file, "--samples", "100", "--seed", "3")
    assert result.exit_code == 0, result.output
    assert "verdict: NOT_FALSIFIED" in result.output


def test_filter_check(model_file):
    result = run("filter-check", model_file, "--trials", "2")
    assert result.exit_code == 0, result.output
    assert "verdict: EQUIVALENT" in result.output


def test_scenario_lossless():
    result = run("scenario", "--horizon", "1")
    assert result.exit_code == 0, result.output
    assert "dp cost: 0" in result.output
    assert "agreement: yes" in result.output


def test_reports_are_byte_identical(model_file):
    a = run("solve", model_file, "--method", "dp")
    b = run("solve", model_file, "--method", "dp")
    assert a.exit_code == b.exit_code == 0
    assert a.output == b.output
    c = run("falsify", model_file, "--samples", "50", "--seed", "1")
    d = run("falsify", model_file, "--samples", "50", "--seed", "1")
    assert c.output == d.output


def test_timing_goes_to_stderr_only(model_file):
    a = run("solve", model_file, "--method", "dp")
    b = run("solve", model_file, "--method", "dp", "--timing")
    assert a.stdout == b.stdout
    assert "elapsed" in b.stderr
