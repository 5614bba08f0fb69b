"""
Celery configuration for background runs.
"""

from celery import Celery
from config.settings import settings

celery_app = Celery(
    "invariance_runs",
    broker=settings.CELERY_BROKER_URL,
    backend=settings.CELERY_RESULT_BACKEND,
    include=[
        "src.runs.tasks",
    ]
)

celery_app.conf.update(
    task_serializer="json",
    accept_content=["json"],
    result_serializer="json",
    timezone="UTC",
    enable_utc=True,
    task_track_started=True,
    task_time_limit=settings.RUN_EXECUTION_TIMEOUT,
    task_soft_time_limit=max(1, settings.RUN_EXECUTION_TIMEOUT - 60),
    worker_prefetch_multiplier=1,
    task_acks_late=True,
    task_reject_on_worker_lost=True,
    result_expires=24 * 3600,
    task_always_eager=settings.CELERY_TASK_ALWAYS_EAGER,
    task_eager_propagates=True,
)

celery_app.conf.task_routes = {
    "src.runs.tasks.execute_run_task": {"queue": "runs"},
}
