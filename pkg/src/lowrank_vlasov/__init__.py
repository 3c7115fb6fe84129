"""Dynamical low-rank solver for the Vlasov-Poisson equation.

Periodic spectral discretization in every direction, projector-splitting
time integration of the low-rank factors (1x1v), and a hierarchical
Tucker variant for the 2x2v setting.
"""

from .grid import Grid, FunctionFamily, inner_product, spectral_derivative, orthonormalize
from .field import ChargeDensity, ElectricField, charge_density_2d, solve_poisson, lowrank_field
from .splitting import (
    LowRankState2D,
    CoeffSet,
    compute_c,
    compute_d,
    K_step,
    S_step,
    L_step,
    lie_step,
    strang_step,
)
from .tucker import (
    TuckerFactor,
    HierarchicalState4D,
    unfold_qr,
    core_gram_schmidt,
    hierarchical_x_update,
    hierarchical_v_update,
    hierarchical_lie_step,
)
from .scenarios import (
    SCENARIOS,
    build_initial_state,
    init_landau_2d,
    init_twostream_2d,
    init_echo,
    inject_echo_perturbation,
    init_landau_4d,
    init_landau_4d_nonaligned,
    init_twostream_4d,
)
from .diagnostics import diagnostics, ConservationTracker, fit_rate, InsufficientDataError
from .reference import EulerianSolver2D
from .config import RunConfig, ConfigError, parse_config
from .runner import run

__all__ = [
    "Grid",
    "FunctionFamily",
    "inner_product",
    "spectral_derivative",
    "orthonormalize",
    "ChargeDensity",
    "ElectricField",
    "charge_density_2d",
    "solve_poisson",
    "lowrank_field",
    "LowRankState2D",
    "CoeffSet",
    "compute_c",
    "compute_d",
    "K_step",
    "S_step",
    "L_step",
    "lie_step",
    "strang_step",
    "TuckerFactor",
    "HierarchicalState4D",
    "unfold_qr",
    "core_gram_schmidt",
    "hierarchical_x_update",
    "hierarchical_v_update",
    "hierarchical_lie_step",
    "SCENARIOS",
    "build_initial_state",
    "init_landau_2d",
    "init_twostream_2d",
    "init_echo",
    "inject_echo_perturbation",
    "init_landau_4d",
    "init_landau_4d_nonaligned",
    "init_twostream_4d",
    "diagnostics",
    "ConservationTracker",
    "fit_rate",
    "InsufficientDataError",
    "EulerianSolver2D",
    "RunConfig",
    "ConfigError",
    "parse_config",
    "run",
]
