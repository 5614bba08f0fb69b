"""
Report schemas emitted as JSON by the estimators and the run engine.
"""

from datetime import datetime
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, Field


class HyperbolicityReport(BaseModel):
    """Finite-horizon check of the exponential dichotomy along one lifted trajectory."""
    passed: bool
    lambda_hat: float = Field(..., description="Fitted dichotomy rate min(expansion, contraction)")
    c_hat: float = Field(..., description="Fitted dichotomy constant")
    expansion_rate: Optional[float] = Field(None, description="Slowest fitted growth on the unstable subspace")
    contraction_rate: Optional[float] = Field(None, description="Slowest fitted decay on the stable subspace")
    angle_floor: float
    invariance_defect: float
    probe_horizon: float
    dims: Tuple[int, int]
    violations: List[Dict[str, Any]] = Field(default_factory=list)


class FloquetExponent(BaseModel):
    value: float
    multiplicity: int


class FloquetReport(BaseModel):
    x0: List[float]
    period: float
    defect: float
    multipliers: List[Tuple[float, float]]
    exponents: List[FloquetExponent]
    positive_sum: float
    newton_iterations: Optional[int] = None


class GramianReport(BaseModel):
    t1: float
    t2: float
    rank: int
    regular: bool
    smallest_singular_value: float = Field(..., description="Smallest singular value counted in the rank, 0 at rank 0")
    singular_values: List[float]


class SccReport(BaseModel):
    id: int
    size: int
    cells: List[int]
    lo: List[float]
    hi: List[float]
    self_loop: bool


class ChainSetReport(BaseModel):
    region: str
    eps: float
    tau_step: float
    n_cells: int
    n_letters: int
    n_edges: int
    blown_cells: int
    sets: List[SccReport]


class SpanningRow(BaseModel):
    tau: float
    count: int
    rate: float = Field(..., description="log(count)/tau")
    candidates: int
    verification_failures: int


class SpanningReport(BaseModel):
    rows: List[SpanningRow]
    slope: Optional[float] = None


class WitnessReport(BaseModel):
    """A periodic control and periodic point realising a search value."""
    value: float
    value_double_horizon: Optional[float] = None
    control: List[List[float]]
    delta: float
    x0: List[float]
    period: float
    horizon: float


class UniquenessReport(BaseModel):
    seeds: int
    confined_orbits: int
    distinct_orbits: int
    unique: bool


class EntropyReport(BaseModel):
    """The three estimates and their cross-checks."""
    spanning_slope: Optional[float]
    upper_bound: float
    lower_bound: Optional[float]
    upper_witness: Optional[WitnessReport] = None
    lower_witness: Optional[WitnessReport] = None
    spanning: Optional[SpanningReport] = None
    sandwich_ok: bool
    spanning_consistent: Optional[bool] = Field(None, description="spanning slope <= upper + spanning slack")
    lower_consistent: Optional[bool] = Field(None, description="lower <= spanning slope + spanning slack")
    uniqueness: Optional[UniquenessReport] = None
    notes: List[str] = Field(default_factory=list)


class ChainWitness(BaseModel):
    """
    A periodic sequence realising a spectrum bound. Without pads it is the
    orbit of `word`; with pads it is the regular eps-chain whose windows
    carry pads[i] at their two outermost entries.
    """
    value: float
    word: List[List[float]]
    eps: Optional[float] = None
    pads: Optional[List[List[List[float]]]] = None


class SpectrumLevel(BaseModel):
    eps: float
    lower: float
    upper: float
    chains: int
    lower_witness: Optional[ChainWitness] = None
    upper_witness: Optional[ChainWitness] = None


class SpectrumReport(BaseModel):
    levels: List[SpectrumLevel]
    lower: float
    upper: float
    periodic_minimum: Optional[float] = None


class ShadowSummary(BaseModel):
    delta: float
    window: int
    chains: int
    length: int
    bound: float
    max_deviation: float
    violations: int


class VolumeRow(BaseModel):
    tau: float
    volume: float
    stderr: float
    hits: int
    samples: int
    j_plus: float
    product: float
    proposal: str
    upper_only: bool = Field(False, description="No sample hit; volume is an upper bound")


class VolumeSeriesReport(BaseModel):
    eps: float
    rows: List[VolumeRow]
    ratio: float
    inflated_ratio: float
    loglog_slope: float
    flagged: bool
    threshold: float
    verification: Optional[HyperbolicityReport] = None


class RunManifest(BaseModel):
    """Provenance of one run; payload files never carry timestamps."""
    command: str
    config_path: str
    config_hash: str
    seed: int
    workers: int
    versions: Dict[str, str]
    artifacts: List[str]
    status: str
    exit_code: int
    error: Optional[Dict[str, Any]] = None
    started_at: datetime
    finished_at: Optional[datetime] = None
