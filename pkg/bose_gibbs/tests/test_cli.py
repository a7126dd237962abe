"""
Tests for the bose-gibbs command line.
"""

import csv
import io
import json

import pytest

from bose_gibbs import acceptance, cli
from bose_gibbs.common.errors import AccuracyError, ConvergenceError, DomainError
from bose_gibbs.config import CONFIG_ENV
from bose_gibbs.utils.artifacts import stable_dumps, strip_volatile


@pytest.fixture(autouse=True)
def isolated_cwd(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv(CONFIG_ENV, raising=False)


def _json(capsys):
    return json.loads(capsys.readouterr().out)


def test_usage_errors_exit_2(capsys):
    assert cli.run([]) == cli.EXIT_USAGE
    assert cli.run(["ideal-gas", "--bogus"]) == cli.EXIT_USAGE
    assert cli.run(["ideal-gas", "--beta", "1", "--beta-ratio", "2"]) == cli.EXIT_USAGE


def test_domain_error_exits_2(capsys):
    code = cli.run(["free-energy", "--N", "1000", "--beta-sweep", "2:1:beta_c:5"])
    assert code == cli.EXIT_USAGE
    assert "DomainError" in capsys.readouterr().err


def test_ideal_gas_json(capsys):
    assert cli.run(["ideal-gas", "--N", "1000", "--beta-ratio", "2"]) == cli.EXIT_OK
    art = _json(capsys)
    assert art["command"] == "ideal-gas"
    assert len(art["config_hash"]) == 64
    result = art["result"]
    assert result["phase"] == "condensed"
    assert result["beta_over_beta_c"] == pytest.approx(2.0)
    assert 0 < result["condensate_fraction"] < 1


def test_ideal_gas_csv_to_file(tmp_path):
    out = tmp_path / "ideal.csv"
    code = cli.run(["--format", "csv", "--output", str(out),
                    "ideal-gas", "--N", "1000", "--beta-ratio", "0.5"])
    assert code == cli.EXIT_OK
    rows = dict(csv.reader(io.StringIO(out.read_text())))
    assert rows["phase"] == "non-condensed"
    assert float(rows["N0"]) < 10


@pytest.mark.timeout(600)
def test_free_energy_sweep_defaults_to_csv(capsys):
    code = cli.run(["free-energy", "--N", "1000", "--beta-sweep", "0.5:2.0:beta_c:5"])
    assert code == cli.EXIT_OK
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert len(rows) == 5
    assert list(rows[0]) == ["beta", "F_bog", "F_bec", "total", "regime"]


@pytest.mark.timeout(300)
def test_same_seed_same_artifact(capsys):
    """Identical inputs and seeds give identical artifacts up to the timestamp."""
    argv = ["--seed", "7", "check-inequalities", "--dims", "2,3", "--count", "2"]
    assert cli.run(argv) == cli.EXIT_OK
    first = strip_volatile(_json(capsys))
    assert cli.run(argv) == cli.EXIT_OK
    second = strip_volatile(_json(capsys))
    assert first["seed"] == 7
    assert first["result"]["violations"] == 0
    assert stable_dumps(first) == stable_dumps(second)


def test_correlators_with_explicit_pattern(capsys):
    code = cli.run(["correlators", "--N", "1e4", "--pattern", "ad(0) a(0)"])
    assert code == cli.EXIT_OK
    result = _json(capsys)["result"]
    assert result["phase"] == "condensed"
    assert len(result["predictions"]) == 1


@pytest.mark.parametrize("exc, code", [
    (AccuracyError, cli.EXIT_ACCURACY),
    (ConvergenceError, cli.EXIT_ACCURACY),
    (DomainError, cli.EXIT_USAGE),
])
def test_acceptance_error_exit_codes(monkeypatch, capsys, exc, code):
    """Errors inside the suite exit 3 or 2 and still write the report."""
    def broken(config, quick, seed):
        raise exc("no verdict")

    monkeypatch.setitem(acceptance.CRITERIA, "root_residuals", broken)
    assert cli.run(["acceptance", "--quick", "--only", "root_residuals",
                    "--no-determinism"]) == code
    result = _json(capsys)["result"]
    assert result["errors"][0]["type"] == exc.__name__
    assert result["hard_failures"] == []


def test_acceptance_exit_code_precedence():
    """Usage errors outrank accuracy errors, which outrank violations."""
    usage = {"kind": acceptance.USAGE}
    accuracy = {"kind": acceptance.ACCURACY}
    assert cli.acceptance_exit_code({"errors": [], "hard_failures": []}) == cli.EXIT_OK
    assert cli.acceptance_exit_code({"errors": [], "hard_failures": ["x"]}) == cli.EXIT_VIOLATION
    assert cli.acceptance_exit_code(
        {"errors": [accuracy], "hard_failures": ["x"]}) == cli.EXIT_ACCURACY
    assert cli.acceptance_exit_code(
        {"errors": [accuracy, usage], "hard_failures": []}) == cli.EXIT_USAGE


@pytest.mark.timeout(300)
def test_free_energy_reports_theta_and_legendre_diagnostics(capsys):
    """Below T_c the payload carries the Θ^BEC ratio and the Legendre gap."""
    assert cli.run(["free-energy", "--N", "1000", "--beta-ratio", "2"]) == cli.EXIT_OK
    result = _json(capsys)["result"]
    assert result["theta_bec"]["branch"] in ("theta_interacting", "theta_ideal")
    assert result["theta_bec"]["ratio"] >= 0
    legendre = result["legendre"]
    assert legendre["ratio"] == pytest.approx(legendre["gap"] / legendre["band"])
    assert cli.run(["free-energy", "--N", "1000", "--beta-ratio", "0.5"]) == cli.EXIT_OK
    above = _json(capsys)["result"]
    assert "theta_bec" not in above and "legendre" not in above
