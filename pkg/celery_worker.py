#!/usr/bin/env python3
"""
Celery worker script for background runs.
"""

import sys
from pathlib import Path

# Add the project root to Python path
project_root = Path(__file__).parent
sys.path.insert(0, str(project_root))

if __name__ == "__main__":
    from src.runs.celery_app import celery_app

    celery_app.worker_main([
        "worker",
        "--loglevel=info",
        "--concurrency=2",
        "--queues=runs",
        "--hostname=runs@%h"
    ])
