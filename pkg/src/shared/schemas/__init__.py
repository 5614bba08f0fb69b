
from .estimators import (
    EntropyConfig,
    MorseConfig,
    SearchConfig,
    SpanningConfig,
    VolumeConfig,
)
from .reports import (
    ChainSetReport,
    EntropyReport,
    FloquetReport,
    GramianReport,
    HyperbolicityReport,
    RunManifest,
    ShadowSummary,
    SpanningReport,
    SpectrumReport,
    VolumeSeriesReport,
)
from .runs import (
    RunConfig,
    RunLogResponse,
    RunRequest,
    RunResponse,
    RunStatus,
)
from .system import ControlBoxConfig, RegionConfig, SystemConfig

__all__ = [
    "SystemConfig",
    "RegionConfig",
    "ControlBoxConfig",
    "SpanningConfig",
    "SearchConfig",
    "MorseConfig",
    "VolumeConfig",
    "EntropyConfig",
    "HyperbolicityReport",
    "FloquetReport",
    "GramianReport",
    "ChainSetReport",
    "SpanningReport",
    "EntropyReport",
    "SpectrumReport",
    "ShadowSummary",
    "VolumeSeriesReport",
    "RunManifest",
    "RunConfig",
    "RunRequest",
    "RunResponse",
    "RunLogResponse",
    "RunStatus",
]
