"""Anisotropic p-energies on grids: norms, Bregman estimates, capacities and Hardy constants."""

from ._core import (
    ArgumentError,
    ConfigurationError,
    DomainError,
    ExponentPair,
    Grid,
    NormFamily,
    SamplingError,
    SetupError,
    bregman_distance,
    capacity,
    energy_Q,
    estimate_constants,
    hardy_constant,
    lagrangian_F,
    morrey_norm,
    norm,
    normalize_config,
    operator_A,
    run,
    scalar_bregman,
    schema,
    structure_constants,
)

__all__ = [
    "ArgumentError",
    "ConfigurationError",
    "DomainError",
    "ExponentPair",
    "Grid",
    "NormFamily",
    "SamplingError",
    "SetupError",
    "bregman_distance",
    "capacity",
    "energy_Q",
    "estimate_constants",
    "hardy_constant",
    "lagrangian_F",
    "morrey_norm",
    "norm",
    "normalize_config",
    "operator_A",
    "run",
    "scalar_bregman",
    "schema",
    "structure_constants",
]
