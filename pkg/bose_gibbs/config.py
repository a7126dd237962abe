"""
config.py

Run configuration: tolerances, regime bands, ensemble seeds and output
options. Files are plain ``key = value`` text parsed with python-dotenv; the
default file is named by the ``BOSE_GIBBS_CONFIG`` environment variable.
"""

import dataclasses
from dataclasses import dataclass
import hashlib
import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

from dotenv import dotenv_values, load_dotenv

from .common.errors import DomainError

logger = logging.getLogger(__name__)

CONFIG_ENV = "BOSE_GIBBS_CONFIG"

# Fields that do not change numerical results and stay out of the digest.
_UNHASHED = ("workers", "log_file", "output_format")


def parse_dims(text: str) -> Tuple[int, ...]:
    """Parse ``"2..8"`` or ``"2,3,5"`` into a tuple of dimensions."""
    text = text.strip()
    if ".." in text:
        lo, hi = text.split("..", 1)
        return tuple(range(int(lo), int(hi) + 1))
    return tuple(int(part) for part in text.split(",") if part.strip())


@dataclass(frozen=True)
class RunConfig:
    """Everything a run depends on besides its explicit command-line inputs."""

    root_tol: float = 1e-12
    quad_tol: float = 1e-10
    tail_tol: float = 1e-12
    phase_window: float = 0.05
    regime_eps: float = 0.05
    log_band: float = 0.05
    shell_limit: int = 20_000_000
    fock_dim_limit: int = 4096
    ensemble_seed: int = 20240601
    ensemble_count: int = 1000
    ensemble_dims: Tuple[int, ...] = (2, 3, 4, 5, 6, 7, 8)
    ratio_ceiling: float = 1e3
    sample_count: int = 1_000_000
    workers: int = 0
    output_format: str = "json"
    vhat_path: Optional[str] = None
    log_file: Optional[str] = "bose_gibbs.log"

    def __post_init__(self):
        for name in ("root_tol", "quad_tol", "tail_tol", "ratio_ceiling"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive, got {getattr(self, name)}")
        for name in ("phase_window", "regime_eps", "log_band"):
            if not 0 <= getattr(self, name) < 1:
                raise DomainError(f"{name} must lie in [0, 1), got {getattr(self, name)}")
        if self.shell_limit < 1 or self.fock_dim_limit < 1:
            raise DomainError("size limits must be positive")
        if self.ensemble_count < 1 or self.sample_count < 1:
            raise DomainError("ensemble_count and sample_count must be >= 1")
        if not self.ensemble_dims or min(self.ensemble_dims) < 2:
            raise DomainError("ensemble_dims must be non-empty with entries >= 2")
        if self.output_format not in ("json", "csv"):
            raise DomainError(f"output_format must be json or csv, got {self.output_format}")

    def tolerances(self) -> Dict[str, float]:
        return {"root": self.root_tol, "quadrature": self.quad_tol, "tail": self.tail_tol}

    def to_dict(self) -> Dict[str, Any]:
        data = dataclasses.asdict(self)
        data["ensemble_dims"] = list(self.ensemble_dims)
        return data

    def digest(self) -> str:
        """SHA-256 of the canonical JSON of every result-affecting field."""
        data = {k: v for k, v in self.to_dict().items() if k not in _UNHASHED}
        blob = json.dumps(data, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()

    def replace(self, **changes: Any) -> "RunConfig":
        return dataclasses.replace(self, **changes)


def _coerce(name: str, raw: Optional[str]) -> Any:
    default = getattr(RunConfig, name)
    if raw is None or raw.strip() == "":
        return None
    raw = raw.strip()
    if name == "ensemble_dims":
        return parse_dims(raw)
    if isinstance(default, bool):
        return raw.lower() in ("1", "true", "yes", "on")
    if isinstance(default, int):
        return int(float(raw))
    if isinstance(default, float):
        return float(raw)
    return raw


def load_config(path: Optional[Union[str, Path]] = None) -> RunConfig:
    """
    Load a RunConfig from ``path``, or from ``$BOSE_GIBBS_CONFIG``, or return
    the defaults when neither is set.
    """
    load_dotenv()
    if path is None:
        path = os.getenv(CONFIG_ENV)
    if not path:
        return RunConfig()

    path = Path(path)
    if not path.is_file():
        raise DomainError(f"config file not found: {path}")

    known = {f.name for f in dataclasses.fields(RunConfig)}
    values = dotenv_values(path)
    unknown = sorted(set(values) - known)
    if unknown:
        raise DomainError(f"unknown config keys in {path}: {', '.join(unknown)}")

    try:
        kwargs = {key: _coerce(key, raw) for key, raw in values.items()}
        kwargs = {key: value for key, value in kwargs.items() if value is not None}
    except ValueError as exc:
        raise DomainError(f"bad value in {path}: {exc}") from exc
    cfg = RunConfig(**kwargs)
    logger.info("Config loaded from %s (digest %s)", path, cfg.digest()[:12])
    return cfg
