"""Two-temperature molecular dynamics of the carbon lattice."""

from .cell import AtomSystem, build_diamond_cell, maxwell_velocities
from .engine import MdEngine, step_nve
from .segment import EnergyLedger, SegmentResult, SegmentSpec, run_track_segment
from .tersoff import (ForceError, TersoffParams, load_tersoff_params,
                      tersoff_energy_forces)
from .ttm import ElectronicGrid, couple, zone_source_from_profile

__all__ = [
    "AtomSystem", "build_diamond_cell", "maxwell_velocities",
    "MdEngine", "step_nve",
    "EnergyLedger", "SegmentResult", "SegmentSpec", "run_track_segment",
    "ForceError", "TersoffParams", "load_tersoff_params",
    "tersoff_energy_forces",
    "ElectronicGrid", "couple", "zone_source_from_profile",
]
