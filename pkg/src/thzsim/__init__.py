"""Wideband THz massive-MIMO-OFDM toolkit: channel model, TTD combining, sparse estimation."""

__version__ = "0.1.0"

from .array_model import (  # noqa: E402
    ArrayGeometry,
    Direction,
    ElementPattern,
    SpatialFrequency,
    VirtualPartition,
    dirichlet,
    upa_response,
)
from .channel_model import OfdmGrid, Path, PhysicalGain, StatisticalGain, synth_channel  # noqa: E402
from .combining import TtdCombiner, build_ttd_combiner, waterfilling  # noqa: E402
from .estimation import EstimateResult, gsomp, gsomp_ss, omp  # noqa: E402
from .metrics import RateConfig, nmse  # noqa: E402

__all__ = [
    "ArrayGeometry", "Direction", "ElementPattern", "SpatialFrequency", "VirtualPartition",
    "dirichlet", "upa_response", "OfdmGrid", "Path", "PhysicalGain", "StatisticalGain",
    "synth_channel", "TtdCombiner", "build_ttd_combiner", "waterfilling", "EstimateResult",
    "gsomp", "gsomp_ss", "omp", "RateConfig", "nmse",
]
