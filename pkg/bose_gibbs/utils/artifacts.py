"""
utils/artifacts.py

JSON/CSV artifact plumbing: conversion of numpy values to plain JSON,
stable serialization, and the provenance envelope every artifact carries.
"""

from datetime import datetime, timezone
import json
import math
from typing import Any, Dict, Optional

import numpy as np

from ..config import RunConfig

# Excluded from determinism comparisons.
VOLATILE_KEYS = ("timestamp",)


def jsonable(obj: Any) -> Any:
    """Recursively turn numpy scalars/arrays, complex numbers and tuples into JSON types."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": jsonable(float(obj.real)), "im": jsonable(float(obj.imag))}
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    return obj


def stable_dumps(obj: Any, indent: Optional[int] = None) -> str:
    """Sorted keys and fixed separators, so equal payloads give equal bytes."""
    separators = (",", ":") if indent is None else (",", ": ")
    return json.dumps(jsonable(obj), sort_keys=True, separators=separators, indent=indent)


def strip_volatile(payload: Dict[str, Any]) -> Dict[str, Any]:
    return {k: v for k, v in payload.items() if k not in VOLATILE_KEYS}


def envelope(
    command: str,
    config: RunConfig,
    result: Any,
    seed: Optional[int] = None,
) -> Dict[str, Any]:
    """Wrap a result with {command, config_hash, seed, tolerances, timestamp}."""
    return {
        "command": command,
        "config_hash": config.digest(),
        "seed": config.ensemble_seed if seed is None else seed,
        "tolerances": config.tolerances(),
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "result": jsonable(result),
    }
