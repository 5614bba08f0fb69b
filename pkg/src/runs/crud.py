"""
CRUD operations for run records and their logs.
"""

from typing import Optional, List, Dict, Any
from sqlalchemy.orm import Session
from sqlalchemy import desc, asc

from ..shared.models.runs import RunRecord, RunLog


def create_run(db: Session, run_data: Dict[str, Any]) -> RunRecord:
    """Create a new run record."""
    run = RunRecord(
        command=run_data["command"],
        config_path=run_data["config_path"],
        config_hash=run_data.get("config_hash"),
        seed=run_data.get("seed"),
        workers=run_data.get("workers"),
        out_dir=run_data.get("out_dir"),
        status=run_data.get("status", "pending"),
        artifacts=[],
        summary={},
    )
    db.add(run)
    db.commit()
    db.refresh(run)
    return run


def get_run(db: Session, run_id: int) -> Optional[RunRecord]:
    """Get a run by ID."""
    return db.query(RunRecord).filter(RunRecord.id == run_id).first()


def get_runs(
    db: Session,
    skip: int = 0,
    limit: int = 100,
    status: Optional[str] = None,
    command: Optional[str] = None,
) -> List[RunRecord]:
    """Get runs, newest first."""
    query = db.query(RunRecord)
    if status:
        query = query.filter(RunRecord.status == status)
    if command:
        query = query.filter(RunRecord.command == command)
    return query.order_by(desc(RunRecord.id)).offset(skip).limit(limit).all()


def count_runs(db: Session, status: Optional[str] = None, command: Optional[str] = None) -> int:
    query = db.query(RunRecord)
    if status:
        query = query.filter(RunRecord.status == status)
    if command:
        query = query.filter(RunRecord.command == command)
    return query.count()


def update_run(db: Session, run_id: int, run_update: Dict[str, Any]) -> Optional[RunRecord]:
    """Update a run record."""
    run = get_run(db, run_id)
    if not run:
        return None

    for field, value in run_update.items():
        if hasattr(run, field):
            setattr(run, field, value)

    db.commit()
    db.refresh(run)
    return run


def create_run_log(db: Session, log_data: Dict[str, Any]) -> RunLog:
    """Append a log entry to a run."""
    log = RunLog(
        run_id=log_data["run_id"],
        step=log_data.get("step", 0),
        action=log_data["action"],
        detail=log_data.get("detail"),
        error=log_data.get("error"),
    )
    db.add(log)
    db.commit()
    db.refresh(log)
    return log


def get_run_logs(db: Session, run_id: int) -> List[RunLog]:
    """Get the log entries of a run in order."""
    return db.query(RunLog).filter(RunLog.run_id == run_id).order_by(asc(RunLog.step), asc(RunLog.id)).all()
