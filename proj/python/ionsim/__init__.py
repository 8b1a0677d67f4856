"""Trapped-ion Coulomb crystal and spectroscopy simulator."""

from ionsim._core import (
    AnisotropyResult,
    CouplingMatrix,
    CrystalConfiguration,
    CrystalState,
    DriveParams,
    FieldModel,
    IonSpecies,
    ModeSpectrum,
    PhononDistribution,
    Transition,
    TrapPotential,
    WireSegment,
    characteristic_length,
    critical_anisotropy,
    effective_lamb_dicke,
    field_at,
    find_equilibrium,
    flop_signal,
    ground_state_size,
    laser_lamb_dicke,
    magnitude_gradient,
    normal_modes,
    parse_wire_file,
    sideband_rabi,
    transition_rabi,
    zeeman_frequency,
)

__all__ = [
    "AnisotropyResult",
    "CouplingMatrix",
    "CrystalConfiguration",
    "CrystalState",
    "DriveParams",
    "FieldModel",
    "IonSpecies",
    "ModeSpectrum",
    "PhononDistribution",
    "Transition",
    "TrapPotential",
    "WireSegment",
    "characteristic_length",
    "critical_anisotropy",
    "effective_lamb_dicke",
    "field_at",
    "find_equilibrium",
    "flop_signal",
    "ground_state_size",
    "laser_lamb_dicke",
    "magnitude_gradient",
    "normal_modes",
    "parse_wire_file",
    "sideband_rabi",
    "transition_rabi",
    "zeeman_frequency",
]

__version__ = "0.1.0"
