"""Discrete-time quantum walk, its lattice Wigner function and transport audits."""
from .config import ConfigError, ExperimentConfig
from .continuum import ScalingFamily, convergence_order
from .walk import History, evolve, gaussian_packet, plane_wave
from .wigner import build_omega, transport_audit, wigner_transform

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "History",
    "ScalingFamily",
    "build_omega",
    "convergence_order",
    "evolve",
    "gaussian_packet",
    "plane_wave",
    "transport_audit",
    "wigner_transform",
]
