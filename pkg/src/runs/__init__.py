"""
Runs Module

Batch command execution: run-file loading, one executor per command, the
run engine with its database bookkeeping, the HTTP router and the
background task.
"""

from .config_loader import PreparedRun, config_hash, load_run_config, prepare_run
from .engine import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, RunEngine, RunOutcome
from .executors import BaseCommandExecutor, CommandExecutorFactory

__all__ = [
    "PreparedRun",
    "config_hash",
    "load_run_config",
    "prepare_run",
    "RunEngine",
    "RunOutcome",
    "EXIT_OK",
    "EXIT_CONFIG",
    "EXIT_NUMERICAL",
    "BaseCommandExecutor",
    "CommandExecutorFactory",
]
