"""
Loading of run files and the systems they reference.
"""

import hashlib
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

from pydantic import ValidationError

from ..shared.errors import ConfigError
from ..shared.keyvalue import first_error, fold_dotted, optional_path, read_key_values
from ..shared.schemas.runs import COMMANDS, RunConfig
from ..system_model import SystemSpec, load_system
from config.settings import settings

logger = logging.getLogger(__name__)


@dataclass
class PreparedRun:
    command: str
    config_path: Path
    config: RunConfig
    spec: SystemSpec
    config_hash: str
    seed: int
    workers: int
    out_dir: Path


def config_hash(path: Path, system_path: Optional[Path] = None) -> str:
    """sha256 over the run file and, when given, the system file it names."""
    digest = hashlib.sha256(path.read_bytes())
    if system_path is not None and system_path.is_file():
        digest.update(system_path.read_bytes())
    return digest.hexdigest()


def load_run_config(path: Union[str, Path]) -> RunConfig:
    path = Path(path)
    flat = read_key_values(path)
    try:
        config = RunConfig.model_validate(fold_dotted(flat))
    except ValidationError as exc:
        raise ConfigError(f"{path}: {first_error(exc)}")
    config.system = optional_path(path.parent, str(config.system))
    if config.out is not None:
        config.out = optional_path(path.parent, str(config.out))
    return config


def prepare_run(
    command: str,
    config_path: Union[str, Path],
    seed: Optional[int] = None,
    workers: Optional[int] = None,
    out: Optional[Union[str, Path]] = None,
) -> PreparedRun:
    """Validate the command and the run file, load the system and settle seed, workers and output directory."""
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r} (expected one of {', '.join(COMMANDS)})")
    config_path = Path(config_path)
    config = load_run_config(config_path)
    if getattr(config, command) is None and command not in ("shadow", "morse", "search"):
        raise ConfigError(f"{config_path}: no [{command}] section (keys {command}.*)")
    spec = load_system(config.system)
    out_dir = Path(out) if out is not None else (config.out or Path(settings.OUTPUT_DIR) / command)
    prepared = PreparedRun(
        command=command,
        config_path=config_path,
        config=config,
        spec=spec,
        config_hash=config_hash(config_path, config.system),
        seed=config.seed if seed is None else seed,
        workers=config.workers if workers is None else workers,
        out_dir=out_dir,
    )
    logger.info(f"Prepared {command} run from {config_path} (system {spec.name!r}, seed {prepared.seed})")
    return prepared
