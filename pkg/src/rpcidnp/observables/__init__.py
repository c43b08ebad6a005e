"""Observables, closed-form estimates and physical constants."""

from .constants import CONSTANTS, PhysicalConstants
from .estimates import (
    enhancement_factor,
    enhancement_vs_thermal,
    estimate_izqc,
    estimate_izS,
    extract_mixing_frequency,
    field_window,
    iz_proj,
    sample_field,
    thermal_polarization,
)

__all__ = [
    "CONSTANTS",
    "PhysicalConstants",
    "enhancement_factor",
    "enhancement_vs_thermal",
    "estimate_izqc",
    "estimate_izS",
    "extract_mixing_frequency",
    "field_window",
    "iz_proj",
    "sample_field",
    "thermal_polarization",
]
