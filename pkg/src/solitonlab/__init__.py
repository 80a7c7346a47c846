"""Slow NLS solitons meeting small impurities: PDE solver, soliton-manifold
decomposition, effective Hamiltonian dynamics and linearized spectra."""

from .grid import GridSpec, WaveField, h1_norm, integrate, sample, spectral_derivative
from .group import GroupElement, LieCoeffs, act, group_inv, group_mul, omega, soliton
from .hamiltonians import PotentialSpec, hamiltonian, mass
from .effective import (EffectiveState, integrate_effective, oscillation_period, rhs_delta,
                        rhs_general, turning_point)
from .solver import SimConfig, evolve
from .modulation import Decomposition, decompose, modulation_residual, mu_from_residual
from .spectral import assemble, constrained_coercivity, h1_coercivity_constant, lina_constants
from .experiments import ComparisonReport, RunSpec, run_comparison, run_scaling
from .errors import ConfigError, NumericalError

__version__ = "0.1.0"

__all__ = [
    "GridSpec", "WaveField", "h1_norm", "integrate", "sample", "spectral_derivative",
    "GroupElement", "LieCoeffs", "act", "group_inv", "group_mul", "omega", "soliton",
    "PotentialSpec", "hamiltonian", "mass",
    "EffectiveState", "integrate_effective", "oscillation_period", "rhs_delta", "rhs_general",
    "turning_point", "SimConfig", "evolve",
    "Decomposition", "decompose", "modulation_residual", "mu_from_residual",
    "assemble", "constrained_coercivity", "h1_coercivity_constant", "lina_constants",
    "ComparisonReport", "RunSpec", "run_comparison", "run_scaling",
    "ConfigError", "NumericalError",
]
