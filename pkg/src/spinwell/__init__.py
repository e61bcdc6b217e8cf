"""Spectral-Galerkin simulation of the stochastic Landau-Lifshitz-Gilbert equation
coupled to Maxwell's equations, with runtime checks of its structural identities."""

from .config import ConfigError, SimConfig, build_initial, build_system, load_config, parse_config
from .diagnostics import InvariantReport
from .dynamics import Forcing, GalerkinState, GalerkinSystem, StateDerivative, evaluate
from .energy import AnisotropyPotential, EnergyBreakdown, total_energy
from .integrator import BrownianPath, NumericalAbort, Trajectory, run_ensemble, simulate
from .io import read_snapshot, write_snapshot
from .noise import NoiseFamily, TruncationPsi, make_noise_family
from .spectral import BasisError, SpectralBases, build_bases

__version__ = "0.1.0"

__all__ = [
    "AnisotropyPotential",
    "BasisError",
    "BrownianPath",
    "ConfigError",
    "EnergyBreakdown",
    "Forcing",
    "GalerkinState",
    "GalerkinSystem",
    "InvariantReport",
    "NoiseFamily",
    "NumericalAbort",
    "SimConfig",
    "SpectralBases",
    "StateDerivative",
    "Trajectory",
    "TruncationPsi",
    "build_bases",
    "build_initial",
    "build_system",
    "evaluate",
    "load_config",
    "make_noise_family",
    "parse_config",
    "read_snapshot",
    "run_ensemble",
    "simulate",
    "total_energy",
    "write_snapshot",
]
