"""Scattering-matrix design for beyond-diagonal reconfigurable intelligent surfaces."""

from .arch import ArchSpec, Kind, circuit_complexity, make_arch, mask, transform_matrix
from .beamform import fp_wsr_precoder, rates, two_stage, utilities
from .chanopt import (
    ChannelSet,
    gen_channels,
    quasi_newton_gain,
    sum_gain,
    ub_sosup,
    upper_bound,
)
from .network import (
    Susceptance,
    scattering_from_susceptance,
    susceptance_from_scattering,
    validate_scattering,
)
from .numlin import takagi
from .sosup import ProjectionResult, project

__all__ = [
    "ArchSpec",
    "ChannelSet",
    "Kind",
    "ProjectionResult",
    "Susceptance",
    "circuit_complexity",
    "fp_wsr_precoder",
    "gen_channels",
    "make_arch",
    "mask",
    "project",
    "quasi_newton_gain",
    "rates",
    "scattering_from_susceptance",
    "susceptance_from_scattering",
    "sum_gain",
    "takagi",
    "transform_matrix",
    "two_stage",
    "ub_sosup",
    "upper_bound",
    "utilities",
    "validate_scattering",
]
