"""
Tuning schemas for the estimators; the run configuration reuses them as sections.
"""

from typing import Annotated, List, Optional, Tuple

from pydantic import BaseModel, BeforeValidator, Field, field_validator

from config.settings import settings
from ..keyvalue import split_floats


def _dims(value):
    if isinstance(value, str):
        parts = [int(p) for p in value.replace(";", ",").split(",") if p.strip()]
        return tuple(parts)
    return value


Dims = Annotated[Optional[Tuple[int, int]], BeforeValidator(_dims)]
FloatList = Annotated[List[float], BeforeValidator(split_floats)]


class SpanningConfig(BaseModel):
    """Candidate generation and covering for spanning-set counts."""
    levels: int = Field(settings.DEFAULT_LEVELS, ge=2, description="Quantization levels of the candidate alphabet")
    switch_step: float = Field(0.5, gt=0, description="Time between control switches of candidates")
    backtrack_limit: int = Field(2000, ge=1, description="Search nodes allowed per point when greedy steering fails")
    chunk_pairs: int = Field(40000, ge=1, description="(candidate, point) pairs integrated per batch")
    reverify: bool = Field(True, description="Re-integrate witnesses at half the step")
    workers: int = Field(settings.DEFAULT_WORKERS, ge=1)


class SearchConfig(BaseModel):
    """Search over periodic controls for the upper and lower bounds."""
    horizon: float = Field(settings.ENTROPY_HORIZON, gt=0)
    restarts: int = Field(8, ge=0, description="Random periodic candidates besides the constant ones")
    period_blocks: int = Field(4, ge=1, description="Switching blocks per period of random candidates")
    block_steps: int = Field(1, ge=1, description="Control grid steps per switching block")
    levels: int = Field(settings.DEFAULT_LEVELS, ge=2)
    descent_sweeps: int = Field(1, ge=0)
    seeds_per_control: int = Field(3, ge=1, description="Initial guesses for the periodic orbit of each control")
    shrink: Optional[float] = Field(None, gt=0, le=1, description="Interior shrink (default from the system)")
    dims: Dims = Field(None, description="(d-, d+) for the lower bound; detected when omitted")
    verify: bool = Field(True, description="Verify hyperbolicity of lower-bound witnesses")
    seed: int = Field(settings.DEFAULT_SEED)
    workers: int = Field(settings.DEFAULT_WORKERS, ge=1)


class MorseConfig(BaseModel):
    """Sampling of regular periodic chains for Morse spectra."""
    eps: FloatList = Field(default_factory=lambda: [0.05, 0.025, 0.0125])
    chains: int = Field(200, ge=1, description="Random chains per eps level")
    max_segments: int = Field(4, ge=1)
    period_max: int = Field(3, ge=1, description="Longest exhaustive periodic sequence")
    concentration: float = Field(0.3, gt=0, description="Dirichlet concentration of letter weights")
    seed: int = Field(settings.DEFAULT_SEED)

    @field_validator("eps")
    @classmethod
    def check_eps(cls, value: List[float]) -> List[float]:
        if not value or any(e <= 0 or e >= 1 for e in value):
            raise ValueError("eps levels must lie in (0, 1)")
        return sorted(value, reverse=True)


class VolumeConfig(BaseModel):
    """Monte-Carlo settings for Bowen-ball volumes."""
    samples: int = Field(100000, ge=1)
    partitions: int = Field(8, ge=1)
    proposal: str = Field("auto", description="auto | ball | box")
    inflation: float = Field(2.0, ge=1)
    threshold: float = Field(settings.VOLUME_RATIO_THRESHOLD, gt=1,
                             description="Largest max/min ratio of the product series that passes (default 10)")
    slope_threshold: float = Field(settings.VOLUME_SLOPE_THRESHOLD, gt=0)
    seed: int = Field(settings.DEFAULT_SEED)
    workers: int = Field(settings.DEFAULT_WORKERS, ge=1)

    @field_validator("proposal")
    @classmethod
    def check_proposal(cls, value: str) -> str:
        if value not in ("auto", "ball", "box"):
            raise ValueError("proposal must be auto, ball or box")
        return value


class EntropyConfig(BaseModel):
    """All three routes plus the cross-checks."""
    taus: FloatList = Field(default_factory=lambda: [1.0, 2.0, 3.0, 4.0, 5.0])
    points_per_axis: int = Field(21, ge=1, description="K-grid points per axis")
    k_region: Optional[str] = Field(None, description="System region holding K (default: Q shrunk by k_shrink)")
    k_shrink: float = Field(0.9, gt=0, le=1)
    spanning_route: bool = Field(True, description="Run the spanning-set route")
    uniqueness_seeds: int = Field(8, ge=2)
    spanning: SpanningConfig = Field(default_factory=SpanningConfig)
    search: SearchConfig = Field(default_factory=SearchConfig)

    @field_validator("taus")
    @classmethod
    def check_taus(cls, value: List[float]) -> List[float]:
        if any(t <= 0 for t in value):
            raise ValueError("horizons must be positive")
        return sorted(value)
