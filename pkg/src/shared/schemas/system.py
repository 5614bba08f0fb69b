"""
System configuration schemas.
"""

from typing import Annotated, Dict, List, Optional

from pydantic import BaseModel, BeforeValidator, Field, model_validator

from config.settings import settings
from ..keyvalue import split_floats

FloatList = Annotated[List[float], BeforeValidator(split_floats)]


class RegionConfig(BaseModel):
    """Box region tiled by cubic cells."""
    lo: FloatList = Field(..., description="Lower corner")
    hi: FloatList = Field(..., description="Upper corner")
    cell: float = Field(..., gt=0, description="Cell width")

    @model_validator(mode="after")
    def check_bounds(self):
        if len(self.lo) != len(self.hi):
            raise ValueError("lo and hi must have the same length")
        if any(lo >= hi for lo, hi in zip(self.lo, self.hi)):
            raise ValueError("region needs lo < hi on every axis")
        return self


class ControlBoxConfig(BaseModel):
    lo: FloatList = Field(default_factory=list)
    hi: FloatList = Field(default_factory=list)


class SystemConfig(BaseModel):
    """Control-affine system x' = f0(x) + sum_i u_i f_i(x) as read from a system file."""
    name: str = Field("system", description="Label used in reports")
    dim: int = Field(..., ge=1, description="State dimension d")
    inputs: int = Field(0, ge=0, description="Control dimension m")
    field: Dict[int, Dict[int, str]] = Field(default_factory=dict, description="field.<i>.<j> expressions")
    u: ControlBoxConfig = Field(default_factory=ControlBoxConfig)
    delta: float = Field(settings.DEFAULT_DELTA, gt=0, description="Control grid step")
    h_int: Optional[float] = Field(None, gt=0, description="Integrator step (default delta/10)")
    levels: int = Field(settings.DEFAULT_LEVELS, ge=2, description="Quantization levels per axis")
    interior_shrink: float = Field(settings.INTERIOR_SHRINK, gt=0, le=1)
    region: Dict[str, RegionConfig] = Field(default_factory=dict)

    @model_validator(mode="after")
    def check_shape(self):
        for i, row in self.field.items():
            if not 0 <= i <= self.inputs:
                raise ValueError(f"field.{i}: row index must lie in 0..{self.inputs}")
            for j in row:
                if not 1 <= j <= self.dim:
                    raise ValueError(f"field.{i}.{j}: component must lie in 1..{self.dim}")
        if len(self.u.lo) != self.inputs or len(self.u.hi) != self.inputs:
            raise ValueError(f"u.lo and u.hi need {self.inputs} entries")
        if any(lo >= hi for lo, hi in zip(self.u.lo, self.u.hi)):
            raise ValueError("control box needs lo < hi on every axis")
        for name, region in self.region.items():
            if len(region.lo) != self.dim:
                raise ValueError(f"region.{name} must have {self.dim} coordinates")
        return self
