"""
Reading of the key-value configuration files (systems and runs).

Files use dotenv syntax; dotted keys are folded into nested dictionaries
before the result is handed to a pydantic model.
"""

import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from dotenv import dotenv_values

from .errors import ConfigError

logger = logging.getLogger(__name__)


def read_key_values(path: Union[str, Path]) -> Dict[str, str]:
    """Read a key-value file; raises ConfigError naming the path when it is missing."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"configuration file not found: {path}")
    values = dotenv_values(path, interpolate=False)
    missing = [key for key, value in values.items() if value is None]
    if missing:
        raise ConfigError(f"{path}: keys without values: {', '.join(missing)}")
    logger.debug(f"Read {len(values)} keys from {path}")
    return dict(values)


def fold_dotted(flat: Dict[str, str]) -> Dict[str, Any]:
    """Turn {'a.b.c': v} into {'a': {'b': {'c': v}}}."""
    nested: Dict[str, Any] = {}
    for key in sorted(flat):
        parts = key.split(".")
        node = nested
        for part in parts[:-1]:
            child = node.setdefault(part, {})
            if not isinstance(child, dict):
                raise ConfigError(f"key {key!r} conflicts with scalar key {part!r}")
            node = child
        if isinstance(node.get(parts[-1]), dict):
            raise ConfigError(f"key {key!r} conflicts with nested keys")
        node[parts[-1]] = flat[key]
    return nested


def split_floats(value: Any) -> Any:
    """Comma-separated text to a list of floats; other values pass through."""
    if isinstance(value, str):
        items = [item.strip() for item in value.split(",") if item.strip()]
        try:
            return [float(item) for item in items]
        except ValueError:
            raise ConfigError(f"expected comma-separated numbers, got {value!r}")
    if isinstance(value, (int, float)):
        return [float(value)]
    return value


def split_vectors(value: Any) -> Any:
    """Semicolon-separated vectors ('1,0; 0,1') to a list of float lists."""
    if isinstance(value, str):
        blocks = [block.strip() for block in value.split(";") if block.strip()]
        return [split_floats(block) for block in blocks]
    return value


def optional_path(base: Path, value: Optional[str]) -> Optional[Path]:
    if value is None:
        return None
    candidate = Path(value)
    return candidate if candidate.is_absolute() else (base / candidate)


def first_error(exc: Exception) -> str:
    """Compact message for a pydantic ValidationError."""
    errors: List[Dict[str, Any]] = getattr(exc, "errors", lambda: [])()
    if not errors:
        return str(exc)
    err = errors[0]
    location = ".".join(str(part) for part in err.get("loc", ()))
    return f"{location}: {err.get('msg', 'invalid value')}"
