"""Linearized quantum Langevin toolkit for standard and quadratic cavity
optomechanics.

Builds and solves the linearized Langevin systems of an optomechanical cavity
over several operator bases, computes steady states, stability, output
spectral densities and sideband detunings, cross-validates the frequency
domain against semiclassical time-domain simulation, and verifies the
underlying operator algebra against an exact truncated Fock-space oracle.
"""

__version__ = "0.1.0"

from .exceptions import PhysicsError, ValidationError
from .langevin import (
    LinearLangevinSystem,
    apply_optomech_perturbation,
    build_first_order,
    build_minimal_fourth,
    build_quadratic,
    build_second_order,
)
from .params import RateSet, SystemParams, derive_rates, shifted_frequencies
from .steady import SteadyState, solve_cubic_steady, solve_quadratic_steady

__all__ = [
    "LinearLangevinSystem",
    "PhysicsError",
    "RateSet",
    "SteadyState",
    "SystemParams",
    "ValidationError",
    "apply_optomech_perturbation",
    "build_first_order",
    "build_minimal_fourth",
    "build_quadratic",
    "build_second_order",
    "derive_rates",
    "shifted_frequencies",
    "solve_cubic_steady",
    "solve_quadratic_steady",
    "__version__",
]
