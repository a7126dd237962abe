"""
Tests for RunConfig and the config loader.
"""

import pytest

from bose_gibbs.common.errors import DomainError
from bose_gibbs.config import CONFIG_ENV, RunConfig, load_config, parse_dims


@pytest.fixture(autouse=True)
def isolated_cwd(tmp_path, monkeypatch):
    """Each test runs in its own directory with no config in the environment."""
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv(CONFIG_ENV, raising=False)


def test_defaults():
    """Defaults are the documented tolerances and ensemble settings."""
    cfg = RunConfig()
    assert cfg.root_tol == 1e-12
    assert cfg.ensemble_dims == (2, 3, 4, 5, 6, 7, 8)
    assert cfg.tolerances() == {"root": 1e-12, "quadrature": 1e-10, "tail": 1e-12}


@pytest.mark.parametrize(
    "changes",
    [
        {"root_tol": 0.0},
        {"quad_tol": -1e-3},
        {"phase_window": 1.5},
        {"ensemble_dims": (1, 2)},
        {"output_format": "xml"},
        {"sample_count": 0},
    ],
)
def test_invalid_values_rejected(changes):
    """Out-of-domain settings raise DomainError."""
    with pytest.raises(DomainError):
        RunConfig(**changes)


def test_digest_ignores_presentation_fields():
    """Workers, log file and output format do not change the digest."""
    base = RunConfig()
    assert base.digest() == base.replace(workers=8, output_format="csv").digest()
    assert base.digest() != base.replace(root_tol=1e-10).digest()


def test_parse_dims():
    """Ranges are inclusive and lists are comma separated."""
    assert parse_dims("2..5") == (2, 3, 4, 5)
    assert parse_dims("2, 4,8") == (2, 4, 8)


def test_load_defaults_without_file():
    """No path and no environment variable gives the defaults."""
    assert load_config() == RunConfig()


def test_load_from_file(tmp_path):
    """KEY=VALUE files are coerced to the field types."""
    path = tmp_path / "run.env"
    path.write_text("root_tol=1e-9\nensemble_dims=2..4\nworkers=3\nvhat_path=v.json\n")
    cfg = load_config(path)
    assert cfg.root_tol == 1e-9
    assert cfg.ensemble_dims == (2, 3, 4)
    assert cfg.workers == 3
    assert cfg.vhat_path == "v.json"


def test_load_from_environment(tmp_path, monkeypatch):
    """The config path may come from the environment."""
    path = tmp_path / "env.cfg"
    path.write_text("ensemble_count=7\n")
    monkeypatch.setenv(CONFIG_ENV, str(path))
    assert load_config().ensemble_count == 7


def test_unknown_key_rejected(tmp_path):
    """Typos in a config file are errors, not silently ignored."""
    path = tmp_path / "bad.env"
    path.write_text("root_tolerance=1e-9\n")
    with pytest.raises(DomainError, match="root_tolerance"):
        load_config(path)


def test_missing_file_rejected(tmp_path):
    """A path that does not exist is an error."""
    with pytest.raises(DomainError):
        load_config(tmp_path / "nope.env")
