"""
Celery tasks for runs handed to the background worker.
"""

import asyncio
import logging

from .celery_app import celery_app
from .engine import RunEngine
from ..shared.database import get_sync_session

logger = logging.getLogger(__name__)


@celery_app.task(bind=True, name="src.runs.tasks.execute_run_task")
def execute_run_task(self, run_id: int):
    """Execute a recorded run."""
    db = next(get_sync_session())
    try:
        logger.info(f"Executing run {run_id} in the background")
        outcome = asyncio.run(RunEngine(db).execute_recorded(run_id))
        return {
            "success": outcome.exit_code == 0,
            "run_id": run_id,
            "exit_code": outcome.exit_code,
            "artifacts": outcome.artifacts,
        }

    except Exception as e:
        logger.error(f"Failed to execute run {run_id}: {str(e)}")
        return {"success": False, "run_id": run_id, "error": str(e)}

    finally:
        db.close()
