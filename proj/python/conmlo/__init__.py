"""Slot-based simulator of unlicensed-spectrum channel access.

Thin python surface over the C++ core: trace synthesis and IO, occupancy
derivation, and scenario execution with per-device metrics.
"""

from conmlo._core import (
    OccupancyOverlay,
    RssiTrace,
    derive_occupancy,
    load_trace,
    run_config,
    save_trace,
    synth_trace,
)

__all__ = [
    "OccupancyOverlay",
    "RssiTrace",
    "derive_occupancy",
    "load_trace",
    "run_config",
    "save_trace",
    "synth_trace",
]
