"""
Runs API router: submit batch commands and inspect their records.
"""

import asyncio
import logging
from typing import List, Optional

from fastapi import APIRouter, Depends, HTTPException, Query, Response, status
from sqlalchemy.orm import Session

from ..shared.database import get_sync_session
from ..shared.schemas.runs import RunListResponse, RunLogResponse, RunRequest, RunResponse
from .crud import count_runs, create_run, get_run, get_run_logs, get_runs
from .engine import EXIT_CONFIG, RunEngine

logger = logging.getLogger(__name__)

router = APIRouter(prefix="/runs", tags=["Runs"])


@router.post("/", response_model=RunResponse, status_code=status.HTTP_201_CREATED)
async def submit_run(request: RunRequest, response: Response, db: Session = Depends(get_sync_session)):
    """
    Execute a command on a run file.

    With `queue` set the run is handed to the worker and returned as pending
    (202); otherwise it executes before the response (201). A run that fails
    still leaves a record and its error artifacts.
    """
    record = await asyncio.to_thread(create_run, db, {
        "command": request.command,
        "config_path": request.config_path,
        "seed": request.seed,
        "workers": request.workers,
        "out_dir": request.out,
    })

    if request.queue:
        from .tasks import execute_run_task
        await asyncio.to_thread(execute_run_task.delay, record.id)
        response.status_code = status.HTTP_202_ACCEPTED
        await asyncio.to_thread(db.refresh, record)
        return RunResponse.model_validate(record)

    outcome = await RunEngine(db).execute_recorded(record.id)
    if outcome.exit_code != 0:
        code = status.HTTP_422_UNPROCESSABLE_ENTITY if outcome.exit_code == EXIT_CONFIG else status.HTTP_500_INTERNAL_SERVER_ERROR
        raise HTTPException(status_code=code, detail={"run_id": record.id, **outcome.error})

    record = await asyncio.to_thread(get_run, db, record.id)
    return RunResponse.model_validate(record)


@router.get("/", response_model=RunListResponse)
async def list_runs(
    skip: int = 0,
    limit: int = 100,
    status_filter: Optional[str] = Query(None, alias="status"),
    command: Optional[str] = None,
    db: Session = Depends(get_sync_session),
):
    """List runs, newest first."""
    runs = await asyncio.to_thread(get_runs, db, skip, limit, status_filter, command)
    total = await asyncio.to_thread(count_runs, db, status_filter, command)
    return RunListResponse(
        runs=[RunResponse.model_validate(run) for run in runs],
        total=total,
        page=skip // limit + 1 if limit else 1,
        per_page=limit,
    )


@router.get("/{run_id}", response_model=RunResponse)
async def get_run_endpoint(run_id: int, db: Session = Depends(get_sync_session)):
    """Get a run by ID."""
    run = await asyncio.to_thread(get_run, db, run_id)
    if not run:
        raise HTTPException(status_code=404, detail="Run not found")
    return RunResponse.model_validate(run)


@router.get("/{run_id}/logs", response_model=List[RunLogResponse])
async def get_run_logs_endpoint(run_id: int, db: Session = Depends(get_sync_session)):
    """Get the log entries of a run."""
    run = await asyncio.to_thread(get_run, db, run_id)
    if not run:
        raise HTTPException(status_code=404, detail="Run not found")
    logs = await asyncio.to_thread(get_run_logs, db, run_id)
    return [RunLogResponse.model_validate(log) for log in logs]
