
from .runs import RunRecord, RunLog

__all__ = ["RunRecord", "RunLog"]
