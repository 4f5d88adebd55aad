"""
Gaussian-state dynamics of tweezer-levitated nanoparticles in a cavity.

The package derives every dynamical rate from tabletop inputs (particle,
tweezer, cavity, gas), propagates the quadrature covariance exactly, and
reduces trajectories to entanglement, entropy, and squeezing measures with
deterministic CSV/JSON artifacts on top.
"""

from .config import (
    CavityParams,
    ConfigError,
    EnvironmentParams,
    ParticleParams,
    SystemConfig,
    TweezerParams,
    config_to_dict,
    load_bundled,
    load_config,
    parse_config,
)
from .dynamics import (
    StabilityReport,
    Trajectory,
    UnstableSystemError,
    evolve,
    exact_step_operators,
    pair_ln_trace_extended,
    stability,
    steady_state,
)
from .gaussian import (
    GaussianState,
    partial_trace,
    purity,
    symplectic_eigenvalues,
    symplectic_form,
    tensor,
    thermal,
    vacuum,
    wigner,
)
from .measures import (
    log_negativity,
    mutual_information,
    squeezing_degree,
    von_neumann_entropy,
)
from .system import (
    DerivedQuantities,
    LinearDynamics,
    build_linear_dynamics,
    closed_form_rates,
    coupling_strength,
    derive,
    free_field_check,
    gas_damping,
    initial_state,
    occupation_from_temperature,
    polarizability,
    recoil_rate,
    temperature_from_occupation,
    thermal_rates,
    trap_frequencies,
    waist_for_target_frequency,
    zero_point_fluctuation,
)

__version__ = "0.1.0"

__all__ = [
    "CavityParams",
    "ConfigError",
    "DerivedQuantities",
    "EnvironmentParams",
    "GaussianState",
    "LinearDynamics",
    "ParticleParams",
    "StabilityReport",
    "SystemConfig",
    "Trajectory",
    "TweezerParams",
    "UnstableSystemError",
    "__version__",
    "build_linear_dynamics",
    "closed_form_rates",
    "config_to_dict",
    "coupling_strength",
    "derive",
    "evolve",
    "exact_step_operators",
    "free_field_check",
    "gas_damping",
    "initial_state",
    "load_bundled",
    "load_config",
    "log_negativity",
    "mutual_information",
    "occupation_from_temperature",
    "pair_ln_trace_extended",
    "parse_config",
    "partial_trace",
    "polarizability",
    "purity",
    "recoil_rate",
    "squeezing_degree",
    "stability",
    "steady_state",
    "symplectic_eigenvalues",
    "symplectic_form",
    "temperature_from_occupation",
    "tensor",
    "thermal",
    "thermal_rates",
    "trap_frequencies",
    "vacuum",
    "von_neumann_entropy",
    "wigner",
    "waist_for_target_frequency",
    "zero_point_fluctuation",
]
