"""
Run engine: prepares a run, executes its command and records the outcome.

Exit codes: 0 success, 1 configuration error, 2 numerical failure.
"""

import asyncio
import logging
import platform
from dataclasses import dataclass, field
from datetime import datetime
from importlib import metadata
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from pydantic import ValidationError
from sqlalchemy.orm import Session

from ..shared.errors import ConfigError, NumericalError
from ..shared.exports import to_payload, write_json
from ..shared.keyvalue import first_error
from ..shared.schemas.reports import RunManifest
from ..shared.schemas.runs import RunStatus
from .config_loader import PreparedRun, prepare_run
from .crud import create_run, create_run_log, get_run, update_run
from .executors import CommandExecutorFactory
from config.settings import settings

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2


@dataclass
class RunOutcome:
    command: str
    exit_code: int
    status: RunStatus
    out_dir: Path
    artifacts: List[str] = field(default_factory=list)
    summary: Dict[str, Any] = field(default_factory=dict)
    error: Optional[Dict[str, Any]] = None
    run_id: Optional[int] = None

    @property
    def manifest_path(self) -> Path:
        return self.out_dir / "manifest.json"


def package_versions() -> Dict[str, str]:
    versions = {"python": platform.python_version()}
    for name in ("numpy", "scipy", "pydantic"):
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = "unknown"
    return versions


def classify(exc: Exception) -> Dict[str, Any]:
    """Exit code and error payload for a failed run."""
    if isinstance(exc, ConfigError):
        return {"exit_code": EXIT_CONFIG, "error": exc.to_dict()}
    if isinstance(exc, ValidationError):
        return {"exit_code": EXIT_CONFIG,
                "error": {"type": "ConfigError", "message": first_error(exc), "details": {}}}
    if isinstance(exc, NumericalError):
        return {"exit_code": EXIT_NUMERICAL, "error": exc.to_dict()}
    return {"exit_code": EXIT_NUMERICAL,
            "error": {"type": type(exc).__name__, "message": str(exc), "details": {}}}


class RunEngine:
    """Executes batch commands, optionally bookkeeping them in the database."""

    def __init__(self, db: Optional[Session] = None):
        self.db = db

    async def start_run(
        self,
        command: str,
        config_path: Union[str, Path],
        seed: Optional[int] = None,
        workers: Optional[int] = None,
        out: Optional[Union[str, Path]] = None,
    ) -> RunOutcome:
        """Record (when a session is attached) and execute one run."""
        run_id = None
        if self.db is not None:
            record = await asyncio.to_thread(create_run, self.db, {
                "command": command,
                "config_path": str(config_path),
                "seed": seed,
                "workers": workers,
                "out_dir": str(out) if out is not None else None,
            })
            run_id = record.id
        return await self._execute(command, config_path, seed, workers, out, run_id)

    async def execute_recorded(self, run_id: int) -> RunOutcome:
        """Execute a run whose record was created beforehand (API and worker path)."""
        if self.db is None:
            raise ValueError("a database session is required to execute a recorded run")
        record = await asyncio.to_thread(get_run, self.db, run_id)
        if not record:
            raise ValueError(f"Run {run_id} not found")
        return await self._execute(record.command, record.config_path, record.seed, record.workers,
                                   record.out_dir, run_id)

    async def _execute(
        self,
        command: str,
        config_path: Union[str, Path],
        seed: Optional[int],
        workers: Optional[int],
        out: Optional[Union[str, Path]],
        run_id: Optional[int],
    ) -> RunOutcome:
        started_at = datetime.utcnow()
        prepared: Optional[PreparedRun] = None
        executor = None
        out_dir = Path(out) if out is not None else Path(settings.OUTPUT_DIR) / command
        try:
            prepared = await asyncio.to_thread(prepare_run, command, config_path, seed, workers, out)
            out_dir = prepared.out_dir
            await self._log(run_id, 1, "configured", {"config_hash": prepared.config_hash, "seed": prepared.seed,
                                                      "workers": prepared.workers, "out_dir": str(out_dir)})
            await self._update(run_id, {
                "status": RunStatus.RUNNING.value,
                "config_hash": prepared.config_hash,
                "seed": prepared.seed,
                "workers": prepared.workers,
                "out_dir": str(out_dir),
                "started_at": started_at,
            })
            executor = CommandExecutorFactory.get_executor(prepared)
            summary = to_payload(await asyncio.to_thread(executor.execute))
        except Exception as exc:
            failure = classify(exc)
            if not isinstance(exc, (ConfigError, NumericalError, ValidationError)):
                logger.exception(f"Unexpected failure in {command} run")
            artifacts = executor.artifacts if executor is not None else []
            outcome = RunOutcome(
                command=command,
                exit_code=failure["exit_code"],
                status=RunStatus.FAILED,
                out_dir=out_dir,
                artifacts=list(artifacts),
                error=failure["error"],
                run_id=run_id,
            )
            await asyncio.to_thread(self._write_failure, outcome)
            await asyncio.to_thread(self._write_manifest, outcome, prepared, config_path, started_at)
            await self.fail_run(outcome)
            return outcome

        outcome = RunOutcome(
            command=command,
            exit_code=EXIT_OK,
            status=RunStatus.COMPLETED,
            out_dir=out_dir,
            artifacts=list(executor.artifacts),
            summary=summary,
            run_id=run_id,
        )
        await asyncio.to_thread(self._write_manifest, outcome, prepared, config_path, started_at)
        await self.complete_run(outcome)
        return outcome

    def _write_failure(self, outcome: RunOutcome) -> None:
        outcome.out_dir.mkdir(parents=True, exist_ok=True)
        write_json(outcome.out_dir / "error.json", outcome.error)
        outcome.artifacts.append("error.json")

    def _write_manifest(
        self,
        outcome: RunOutcome,
        prepared: Optional[PreparedRun],
        config_path: Union[str, Path],
        started_at: datetime,
    ) -> None:
        outcome.out_dir.mkdir(parents=True, exist_ok=True)
        manifest = RunManifest(
            command=outcome.command,
            config_path=str(config_path),
            config_hash=prepared.config_hash if prepared else "",
            seed=prepared.seed if prepared else settings.DEFAULT_SEED,
            workers=prepared.workers if prepared else settings.DEFAULT_WORKERS,
            versions=package_versions(),
            artifacts=list(outcome.artifacts),
            status=outcome.status.value,
            exit_code=outcome.exit_code,
            error=outcome.error,
            started_at=started_at,
            finished_at=datetime.utcnow(),
        )
        write_json(outcome.manifest_path, manifest)

    async def complete_run(self, outcome: RunOutcome) -> None:
        """Mark a run as completed."""
        logger.info(f"Completed {outcome.command} run: {len(outcome.artifacts)} artifacts in {outcome.out_dir}")
        await self._update(outcome.run_id, {
            "status": RunStatus.COMPLETED.value,
            "exit_code": outcome.exit_code,
            "artifacts": outcome.artifacts,
            "summary": outcome.summary,
            "completed_at": datetime.utcnow(),
        })
        await self._log(outcome.run_id, 2, "completed", {"artifacts": outcome.artifacts})

    async def fail_run(self, outcome: RunOutcome) -> None:
        """Mark a run as failed and log the error."""
        logger.error(f"Failed {outcome.command} run (exit {outcome.exit_code}): {outcome.error['message']}")
        await self._update(outcome.run_id, {
            "status": RunStatus.FAILED.value,
            "exit_code": outcome.exit_code,
            "artifacts": outcome.artifacts,
            "error": outcome.error,
            "completed_at": datetime.utcnow(),
        })
        await self._log(outcome.run_id, 2, "failed", {"type": outcome.error["type"]}, outcome.error["message"])

    async def _update(self, run_id: Optional[int], values: Dict[str, Any]) -> None:
        if self.db is None or run_id is None:
            return
        await asyncio.to_thread(update_run, self.db, run_id, values)

    async def _log(self, run_id: Optional[int], step: int, action: str, detail: Dict[str, Any],
                   error: Optional[str] = None) -> None:
        if self.db is None or run_id is None:
            return
        await asyncio.to_thread(create_run_log, self.db, {
            "run_id": run_id, "step": step, "action": action, "detail": detail, "error": error,
        })
