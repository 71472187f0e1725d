"""Serialization helpers shared by the CLI and report builders."""
from __future__ import annotations

import dataclasses
import json
import math
from typing import Any

import numpy as np


class _Unreachable:
    """Sentinel for an infinite hop or metric distance."""

    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "UNREACHABLE"

    def __reduce__(self):
        return (_Unreachable, ())


UNREACHABLE = _Unreachable()


def decimal(x: float) -> str:
    """Shortest round-trip decimal string for a float."""
    x = float(x)
    if math.isinf(x):
        return "unreachable" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return repr(x)


def jsonable(obj: Any) -> Any:
    """Convert nested results to JSON-safe values, floats as decimal strings."""
    if obj is UNREACHABLE:
        return "unreachable"
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return decimal(obj)
    if isinstance(obj, str) or obj is None:
        return obj
    if hasattr(obj, "to_dict"):
        return jsonable(obj.to_dict())
    if dataclasses.is_dataclass(obj):
        return {f.name: jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset, np.ndarray)):
        seq = sorted(obj) if isinstance(obj, (set, frozenset)) else list(obj)
        return [jsonable(v) for v in seq]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj: Any) -> str:
    return json.dumps(jsonable(obj), indent=2, sort_keys=True) + "\n"


def low_discrepancy(count: int, modulus: int, offset: int = 0) -> list[int]:
    """Deterministic well-spread integers in ``range(modulus)`` (golden-ratio sequence)."""
    phi = (math.sqrt(5.0) - 1.0) / 2.0
    return [int(((offset + k + 1) * phi) % 1.0 * modulus) for k in range(count)]
