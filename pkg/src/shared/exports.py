"""
JSON writers for reports and manifests.

Payload files are written with sorted keys and fixed indentation so reruns
with the same configuration produce identical bytes.
"""

import json
import math
from pathlib import Path
from typing import Any, Union

import numpy as np
from pydantic import BaseModel


def _plain(value: Any) -> Any:
    if isinstance(value, BaseModel):
        return _plain(value.model_dump(mode="json"))
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, np.generic):
        return _plain(value.item())
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    if isinstance(value, Path):
        return str(value)
    return value


def to_payload(value: Any) -> Any:
    """Plain JSON-compatible data; non-finite floats become the strings 'inf', '-inf', 'nan'."""
    return _plain(value)


def write_json(path: Union[str, Path], value: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w") as handle:
        json.dump(to_payload(value), handle, indent=2, sort_keys=True)
        handle.write("\n")
    return path
