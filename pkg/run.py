#!/usr/bin/env python3
"""
Command line for batch runs.

    python run.py <command> --config run.cfg [--seed N] [--workers N] [--out DIR] [--record]
    python run.py serve [--host H] [--port P]

Exit status: 0 success, 1 configuration error, 2 numerical failure.
"""

import argparse
import asyncio
import json
import logging
import sys
from typing import List, Optional

from config.settings import settings
from src.shared.schemas.runs import COMMANDS

logger = logging.getLogger("run")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="run.py", description=settings.API_DESCRIPTION)
    parser.add_argument("command", choices=list(COMMANDS) + ["serve"])
    parser.add_argument("--config", help="Run file (key = value lines)")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--workers", type=int, default=None)
    parser.add_argument("--out", default=None, help="Output directory (default out/<command>)")
    parser.add_argument("--record", action="store_true", help="Record the run in the database")
    parser.add_argument("--host", default="0.0.0.0")
    parser.add_argument("--port", type=int, default=8000)
    parser.add_argument("--reload", action="store_true")
    return parser


def serve(args: argparse.Namespace) -> int:
    import uvicorn
    uvicorn.run("main:app", host=args.host, port=args.port, reload=args.reload, log_level="info")
    return 0


def execute(args: argparse.Namespace) -> int:
    from src.runs.engine import RunEngine

    db = None
    if args.record:
        from src.shared.database import get_sync_session, init_sync_db
        init_sync_db()
        db = next(get_sync_session())
    try:
        outcome = asyncio.run(RunEngine(db).start_run(args.command, args.config, args.seed, args.workers, args.out))
    finally:
        if db is not None:
            db.close()

    if outcome.exit_code == 0:
        print(json.dumps({"out": str(outcome.out_dir), "artifacts": outcome.artifacts, **outcome.summary},
                         indent=2, default=str))
    else:
        print(f"error: {outcome.error['type']}: {outcome.error['message']}", file=sys.stderr)
    return outcome.exit_code


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, settings.LOG_LEVEL.upper(), logging.INFO),
        format='%(asctime)s - %(levelname)s - %(message)s',
    )
    if args.command == "serve":
        return serve(args)
    if not args.config:
        print("error: --config is required", file=sys.stderr)
        return 1
    if args.workers is not None and args.workers < 1:
        print("error: --workers must be at least 1", file=sys.stderr)
        return 1
    return execute(args)


if __name__ == "__main__":
    sys.exit(main())
