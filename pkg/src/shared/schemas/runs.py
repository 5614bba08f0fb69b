"""
Run configuration sections and the run API schemas.
"""

from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Annotated, Any, Dict, List, Optional

from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, field_validator

from config.settings import settings
from ..keyvalue import split_vectors
from .estimators import Dims, FloatList, MorseConfig, SearchConfig, SpanningConfig, VolumeConfig

Vectors = Annotated[Optional[List[List[float]]], BeforeValidator(split_vectors)]

COMMANDS = (
    "integrate", "cocycle", "floquet", "gramian", "splitting", "chainsets",
    "spanning", "entropy", "shadow", "morse", "volcheck",
)


class RunStatus(str, Enum):
    PENDING = "pending"
    RUNNING = "running"
    COMPLETED = "completed"
    FAILED = "failed"


class ControlSection(BaseModel):
    """A piecewise-constant control: one vector per grid block, ';'-separated."""
    model_config = ConfigDict(extra="forbid")
    control: Vectors = Field(None, description="Block values; default is the centre of U")
    periodic: bool = Field(True, description="Repeat the blocks periodically")


class IntegrateSection(ControlSection):
    x0: FloatList
    tau: float = Field(..., gt=0)
    backward: bool = False


class CocycleSection(ControlSection):
    x0: FloatList
    tau: float = Field(..., gt=0)
    kind: str = Field("both", description="exterior | det | both")

    @field_validator("kind")
    @classmethod
    def check_kind(cls, value: str) -> str:
        if value not in ("exterior", "det", "both"):
            raise ValueError("kind must be exterior, det or both")
        return value


class FloquetSection(ControlSection):
    x0: FloatList = Field(..., description="Periodic point, or the Newton starting guess")
    newton: bool = True


class GramianSection(ControlSection):
    x0: FloatList
    t1: float = Field(0.0, ge=0)
    t2: float = Field(..., gt=0)


class SplittingSection(ControlSection):
    x0: FloatList
    tau: float = Field(0.0, ge=0)
    horizon: Optional[float] = Field(None, gt=0)
    dims: Dims = None
    region: Optional[str] = None
    verify: bool = True
    continuity: bool = False


class ChainsetsSection(BaseModel):
    model_config = ConfigDict(extra="forbid")
    region: str
    eps: float = Field(..., gt=0)
    tau_step: float = Field(..., gt=0)
    levels: Optional[int] = Field(None, ge=2)
    min_cells: int = Field(2, ge=1, description="Smallest reported set, in cells")
    no_return_samples: int = Field(0, ge=0)


class SpanningSection(SpanningConfig):
    model_config = ConfigDict(extra="forbid")
    region: str = Field(..., description="Q")
    k_region: Optional[str] = None
    k_shrink: float = Field(0.9, gt=0, le=1)
    points_per_axis: int = Field(21, ge=1)
    taus: FloatList = Field(default_factory=lambda: [1.0, 2.0, 3.0, 4.0, 5.0])


class SearchSection(SearchConfig):
    model_config = ConfigDict(extra="forbid")


class EntropySection(BaseModel):
    model_config = ConfigDict(extra="forbid")
    region: str = Field(..., description="Q")
    k_region: Optional[str] = None
    k_shrink: float = Field(0.9, gt=0, le=1)
    points_per_axis: int = Field(21, ge=1)
    taus: FloatList = Field(default_factory=lambda: [1.0, 2.0, 3.0, 4.0, 5.0])
    spanning_route: bool = True
    uniqueness_seeds: int = Field(8, ge=2)


class ShadowSection(BaseModel):
    model_config = ConfigDict(extra="forbid")
    delta: FloatList = Field(default_factory=lambda: [1e-2, 1e-4, 1e-6])
    chains: int = Field(1000, ge=1)
    length: int = Field(50, ge=1)
    window: int = Field(64, ge=1)
    periodic: bool = False
    chain_file: Optional[str] = Field(None, description="CSV chain (step, index, c1..cm) to shadow instead")

    @field_validator("delta")
    @classmethod
    def check_delta(cls, value: List[float]) -> List[float]:
        if not value or any(d <= 0 for d in value):
            raise ValueError("delta values must be positive")
        return value


class MorseSection(MorseConfig):
    model_config = ConfigDict(extra="forbid")
    cocycle: str = Field("coordinate", description="coordinate | constant | expression")
    component: int = Field(0, ge=0)
    value: float = 0.0
    expression: Optional[str] = None
    levels: Optional[int] = Field(None, ge=2, description="Quantization of U for the alphabet")

    @field_validator("cocycle")
    @classmethod
    def check_cocycle(cls, value: str) -> str:
        if value not in ("coordinate", "constant", "expression"):
            raise ValueError("cocycle must be coordinate, constant or expression")
        return value


class VolcheckSection(VolumeConfig, ControlSection):
    model_config = ConfigDict(extra="forbid")
    x0: FloatList
    eps: float = Field(..., gt=0)
    horizons: FloatList
    dims: Dims = None
    splitting: bool = Field(True, description="Use J+ from the splitting along (u, x0); off means J+ = 1")


class RunConfig(BaseModel):
    """A run file: the system, shared options and one section per command."""
    model_config = ConfigDict(extra="forbid")
    system: Path
    seed: int = Field(settings.DEFAULT_SEED)
    workers: int = Field(settings.DEFAULT_WORKERS, ge=1)
    out: Optional[Path] = None
    integrate: Optional[IntegrateSection] = None
    cocycle: Optional[CocycleSection] = None
    floquet: Optional[FloquetSection] = None
    gramian: Optional[GramianSection] = None
    splitting: Optional[SplittingSection] = None
    chainsets: Optional[ChainsetsSection] = None
    spanning: Optional[SpanningSection] = None
    search: Optional[SearchSection] = None
    entropy: Optional[EntropySection] = None
    shadow: Optional[ShadowSection] = None
    morse: Optional[MorseSection] = None
    volcheck: Optional[VolcheckSection] = None


class RunRequest(BaseModel):
    """Request to execute a command on a run file."""
    command: str = Field(..., description="One of " + ", ".join(COMMANDS))
    config_path: str
    seed: Optional[int] = None
    workers: Optional[int] = Field(None, ge=1)
    out: Optional[str] = None
    queue: bool = Field(False, description="Hand the run to the background worker")

    @field_validator("command")
    @classmethod
    def check_command(cls, value: str) -> str:
        if value not in COMMANDS:
            raise ValueError(f"unknown command {value!r}")
        return value


class RunResponse(BaseModel):
    model_config = ConfigDict(from_attributes=True)
    id: int
    command: str
    config_path: str
    config_hash: Optional[str]
    seed: Optional[int]
    workers: Optional[int]
    out_dir: Optional[str]
    status: RunStatus
    exit_code: Optional[int]
    artifacts: List[str] = Field(default_factory=list)
    summary: Dict[str, Any] = Field(default_factory=dict)
    error: Optional[Dict[str, Any]] = None
    created_at: datetime
    started_at: Optional[datetime]
    completed_at: Optional[datetime]


class RunListResponse(BaseModel):
    runs: List[RunResponse]
    total: int
    page: int
    per_page: int


class RunLogResponse(BaseModel):
    model_config = ConfigDict(from_attributes=True)
    id: int
    run_id: int
    step: int
    action: str
    detail: Optional[Dict[str, Any]]
    error: Optional[str]
    logged_at: datetime
