"""
From experiment parameters to derived rates and linear dynamics.

All frequencies and rates here are angular (rad/s). The mechanical axis kept
in the dynamics is the tweezer polarization axis x, the one the cavity mode
couples to; y and z trap frequencies are derived for diagnostics only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .config import CavityParams, EnvironmentParams, ParticleParams, SystemConfig, TweezerParams
from .constants import c, epsilon_0, hbar, k_B
from .gaussian import GaussianState, tensor, thermal, vacuum

_TWO_PI = 2.0 * math.pi

# Kinetic-theory prefactor of the gas damping rate in the free-molecular
# regime (hard-sphere accommodation); dimensionless.
_GAS_DAMPING_PREFACTOR = 15.8


def _susceptibility(refractive_index: float) -> float:
    """(ε − 1)/(ε + 2) with ε = n_R²; the Clausius-Mossotti factor."""
    eps = refractive_index**2
    return (eps - 1.0) / (eps + 2.0)


def polarizability(particle: ParticleParams) -> float:
    """Dipole polarizability α = 4π ε₀ R³ (ε − 1)/(ε + 2)."""
    return 4.0 * math.pi * epsilon_0 * particle.radius**3 * _susceptibility(particle.refractive_index)


def trap_frequencies(
    particle: ParticleParams, tweezer: TweezerParams
) -> tuple[float, float, float]:
    """
    Harmonic trap frequencies (ω_x, ω_y, ω_z) at the tweezer focus.

    With a single (isotropic) waist the two transverse frequencies coincide:
    ω_x = ω_y = sqrt(4 α P_t / (m w₀⁴ π ε₀ c)); the axial one uses the
    Rayleigh range z_R = k_t w₀² / 2.
    """
    mass = particle.resolved_mass
    if mass <= 0:
        raise ValueError("particle mass must be positive")
    alpha = polarizability(particle)
    denom = math.pi * epsilon_0 * c * mass
    omega_x = math.sqrt(4.0 * alpha * tweezer.power / (denom * tweezer.waist**4))
    z_r = tweezer.rayleigh_range
    omega_z = math.sqrt(2.0 * alpha * tweezer.power / (denom * tweezer.waist**2 * z_r**2))
    return omega_x, omega_x, omega_z


def zero_point_fluctuation(particle: ParticleParams, omega: float) -> float:
    """Ground-state position spread x_zpf = sqrt(ħ / (2 m ω))."""
    if omega <= 0:
        raise ValueError("frequency must be positive")
    return math.sqrt(hbar / (2.0 * particle.resolved_mass * omega))


def coupling_strength(
    particle: ParticleParams,
    tweezer: TweezerParams,
    cavity: CavityParams,
    omega: float,
) -> float:
    """
    Coherent-scattering coupling g = x_zpf · k_c · (α ε_t ε_c / 2ħ) · sin θ.

    ε_t is the tweezer field amplitude at the focus, ε_c the cavity vacuum
    field with mode volume π w₀c² L / 4, and θ the tweezer polarization angle
    relative to the cavity axis (θ = π/2 maximizes the coupling).
    """
    alpha = polarizability(particle)
    eps_t = math.sqrt(4.0 * tweezer.power / (math.pi * tweezer.waist**2 * epsilon_0 * c))
    lambda_c = cavity.resonance_wavelength(tweezer)
    omega_c = _TWO_PI * c / lambda_c
    eps_c = math.sqrt(hbar * omega_c / (2.0 * epsilon_0 * cavity.mode_volume()))
    k_c = _TWO_PI / lambda_c
    x_zpf = zero_point_fluctuation(particle, omega)
    return x_zpf * k_c * (alpha * eps_t * eps_c / (2.0 * hbar)) * math.sin(
        tweezer.polarization_angle
    )


def gas_damping(particle: ParticleParams, environment: EnvironmentParams) -> float:
    """Residual-gas momentum damping γ ≈ 15.8 R² p / (m v_gas), in rad/s."""
    if environment.pressure == 0.0:
        return 0.0
    v_gas = math.sqrt(3.0 * k_B * environment.temperature / environment.gas_molecule_mass)
    return (
        _GAS_DAMPING_PREFACTOR
        * particle.radius**2
        * environment.pressure
        / (particle.resolved_mass * v_gas)
    )


def recoil_rate(particle: ParticleParams, tweezer: TweezerParams, omega: float) -> float:
    """
    Photon-recoil heating rate Γ_recoil = (1/5)(P_scatt / m c²)(ω_t / ω).

    P_scatt = I₀ σ with focal intensity I₀ = 2 P_t / (π w₀²) and Rayleigh
    cross-section σ = α² k_t⁴ / (6π ε₀²).
    """
    alpha = polarizability(particle)
    intensity = 2.0 * tweezer.power / (math.pi * tweezer.waist**2)
    cross_section = alpha**2 * tweezer.wavenumber**4 / (6.0 * math.pi * epsilon_0**2)
    scattered = intensity * cross_section
    omega_t = c * tweezer.wavenumber
    return 0.2 * scattered / (particle.resolved_mass * c**2) * (omega_t / omega)


def thermal_rates(
    particle: ParticleParams,
    environment: EnvironmentParams,
    omega: float,
    *,
    recoil: float = 0.0,
) -> tuple[float, float, float]:
    """
    Bath occupation, gas decoherence rate, and coherence time.

    Returns (n̄_th, Γ_gas, τ) with the high-temperature occupation
    n̄_th = k_B T / (ħ ω), Γ_gas = γ n̄_th, and τ = 1 / (Γ_gas + recoil).
    Pass the recoil rate to fold it into τ; τ is inf for a closed system.
    """
    if environment.temperature <= 0:
        raise ValueError("environment temperature must be positive")
    n_th = k_B * environment.temperature / (hbar * omega)
    gamma_gas = gas_damping(particle, environment) * n_th
    total = gamma_gas + recoil
    tau = math.inf if total == 0.0 else 1.0 / total
    return n_th, gamma_gas, tau


def occupation_from_temperature(temperature: float, omega: float) -> float:
    """Exact Bose occupation n̄ = 1 / (exp(ħω / k_B T) − 1)."""
    if temperature <= 0:
        return 0.0
    return 1.0 / math.expm1(hbar * omega / (k_B * temperature))


def temperature_from_occupation(occupation: float, omega: float) -> float:
    """Inverse of the exact Bose law; 0 K for zero occupation."""
    if occupation <= 0:
        return 0.0
    return hbar * omega / (k_B * math.log1p(1.0 / occupation))


def waist_for_target_frequency(
    target_omega: float,
    power: float,
    density: float,
    refractive_index: float,
) -> float:
    """
    Tweezer waist that pins the transverse trap frequency to a target.

    Inverts ω(P_t, w₀) for a density-resolved mass (mass homogeneity makes
    the result radius-independent): w₀ = ((12/π) χ P_t / (ρ c))^{1/4} / √ω.
    """
    if target_omega <= 0:
        raise ValueError("target frequency must be positive")
    chi = _susceptibility(refractive_index)
    return (12.0 / math.pi * chi * power / (density * c)) ** 0.25 / math.sqrt(target_omega)


@dataclass(frozen=True)
class ClosedFormRates:
    """The four single-expression parameter dependences (all rad/s)."""

    coupling: float
    frequency: float
    gas_decoherence: float
    recoil_rate: float


def closed_form_rates(
    radius: float,
    power: float,
    density: float,
    *,
    refractive_index: float,
    tweezer_waist: float,
    tweezer_wavelength: float,
    cavity_length: float,
    cavity_waist: float,
    cavity_wavelength: float,
    pressure: float,
    gas_temperature: float,
    gas_molecule_mass: float,
) -> ClosedFormRates:
    """
    Closed forms of (g, ω, Γ_gas, Γ_recoil) as functions of (R, P_t, ρ).

    These are the constituent operations of this module collapsed to single
    expressions; a test holds them to the composed versions within 1e-6
    relative. The bath occupation inside Γ_gas is the high-temperature
    n̄_th evaluated at the closed-form ω.
    """
    chi = _susceptibility(refractive_index)
    omega_c = _TWO_PI * c / cavity_wavelength
    k_t = _TWO_PI / tweezer_wavelength

    coupling = (
        (12.0 / math.pi) ** 0.25
        * chi**0.75
        * power**0.25
        * radius**1.5
        * omega_c**1.5
        / (math.sqrt(cavity_length) * c**1.25 * cavity_waist * density**0.25)
    )
    frequency = (
        math.sqrt(12.0 / math.pi * chi) * math.sqrt(power) / (tweezer_waist**2 * math.sqrt(density * c))
    )
    n_th = k_B * gas_temperature / (hbar * frequency)
    gas_decoherence = (
        79.0
        * math.sqrt(3.0)
        / (20.0 * math.pi)
        * n_th
        * pressure
        / (density * math.sqrt(k_B * gas_temperature / gas_molecule_mass) * radius)
    )
    recoil = (
        2.0
        * math.sqrt(3.0)
        / (15.0 * math.sqrt(math.pi))
        * chi**1.5
        * math.sqrt(power)
        * radius**3
        * k_t**5
        / math.sqrt(density * c)
    )
    return ClosedFormRates(
        coupling=coupling,
        frequency=frequency,
        gas_decoherence=gas_decoherence,
        recoil_rate=recoil,
    )


@dataclass(frozen=True)
class FreeFieldCheck:
    """Dimensionless spread-to-wavelength products for the free-field test."""

    k_x_zpf: float
    k_x_thermal: float
    negligible: bool


# Both products must stay below this for the particle-free-field interaction
# to be dropped from the dynamics; an explicit stand-in for "much less than 1".
FREE_FIELD_THRESHOLD = 0.05


def free_field_check(
    particle: ParticleParams,
    tweezer: TweezerParams,
    *,
    temperature: float | None = None,
    occupation: float | None = None,
) -> FreeFieldCheck:
    """
    Check that particle spreads stay far below the tweezer wavelength.

    Returns k_t·x_zpf and k_t·sqrt⟨x²⟩ plus a flag that both fall below
    FREE_FIELD_THRESHOLD. The thermal spread uses classical equipartition
    sqrt(k_B T / (m ω²)) when a temperature is given, and the occupation
    form x_zpf·sqrt(2n̄ + 1) otherwise (they agree at high temperature).
    """
    if temperature is not None and occupation is not None:
        raise ValueError("give a temperature or an occupation, not both")
    omega_x = trap_frequencies(particle, tweezer)[0]
    x_zpf = zero_point_fluctuation(particle, omega_x)
    if temperature is not None:
        spread = math.sqrt(k_B * temperature / (particle.resolved_mass * omega_x**2))
    else:
        n_occ = 0.0 if occupation is None else occupation
        spread = x_zpf * math.sqrt(2.0 * n_occ + 1.0)
    k_t = tweezer.wavenumber
    k_zpf = k_t * x_zpf
    k_thermal = k_t * spread
    return FreeFieldCheck(
        k_x_zpf=k_zpf,
        k_x_thermal=k_thermal,
        negligible=bool(max(k_zpf, k_thermal) < FREE_FIELD_THRESHOLD),
    )


@dataclass(frozen=True)
class DerivedQuantities:
    """Everything the dynamics needs, computed from a SystemConfig."""

    polarizability: float
    trap_frequencies: tuple[float, float, float]
    x_zpf: float
    coupling: float
    gas_damping: float
    thermal_occupation: float
    gas_decoherence: float
    recoil_rate: float
    coherence_time: float
    initial_occupation: float
    density_implied_mass: float | None
    warnings: tuple[str, ...]

    @property
    def frequency(self) -> float:
        return self.trap_frequencies[0]

    def to_json_dict(self) -> dict:
        def in_cycles(rate: float) -> dict:
            return {"rad_per_s": rate, "over_2pi_hz": rate / _TWO_PI}

        return {
            "polarizability_F_m2": self.polarizability,
            "trap_frequency_x": in_cycles(self.trap_frequencies[0]),
            "trap_frequency_y": in_cycles(self.trap_frequencies[1]),
            "trap_frequency_z": in_cycles(self.trap_frequencies[2]),
            "zero_point_fluctuation_m": self.x_zpf,
            "coupling": in_cycles(self.coupling),
            "gas_damping": in_cycles(self.gas_damping),
            "thermal_occupation": self.thermal_occupation,
            "gas_decoherence": in_cycles(self.gas_decoherence),
            "recoil_rate": in_cycles(self.recoil_rate),
            "coherence_time_s": self.coherence_time,
            "initial_occupation": self.initial_occupation,
            "density_implied_mass_kg": self.density_implied_mass,
            "warnings": list(self.warnings),
        }


def resolve_initial_occupation(config: SystemConfig, omega: float) -> float:
    """Occupation from the config: explicit value wins, else exact Bose at T₀."""
    particle = config.particle
    if particle.initial_occupation is not None:
        return particle.initial_occupation
    if particle.initial_temperature is not None:
        return occupation_from_temperature(particle.initial_temperature, omega)
    return 0.0


def derive(config: SystemConfig) -> DerivedQuantities:
    """Compute every derived quantity for a config, with consistency notes."""
    particle = config.particle
    warnings: list[str] = []
    implied = particle.density_implied_mass
    if particle.mass is not None and implied is not None:
        rel = abs(particle.mass - implied) / implied
        if rel > 0.01:
            warnings.append(
                f"mass {particle.mass:.4e} kg disagrees with the density-implied "
                f"{implied:.4e} kg by {100 * rel:.1f}%; the explicit mass is used"
            )
    frequencies = trap_frequencies(particle, config.tweezer)
    omega = frequencies[0]
    x_zpf = zero_point_fluctuation(particle, omega)
    g = coupling_strength(particle, config.tweezer, config.cavity, omega)
    gamma = gas_damping(particle, config.environment)
    recoil = recoil_rate(particle, config.tweezer, omega)
    n_th, gamma_gas, tau = thermal_rates(particle, config.environment, omega, recoil=recoil)
    return DerivedQuantities(
        polarizability=polarizability(particle),
        trap_frequencies=frequencies,
        x_zpf=x_zpf,
        coupling=g,
        gas_damping=gamma,
        thermal_occupation=n_th,
        gas_decoherence=gamma_gas,
        recoil_rate=recoil,
        coherence_time=tau,
        initial_occupation=resolve_initial_occupation(config, omega),
        density_implied_mass=implied,
        warnings=tuple(warnings),
    )


@dataclass(frozen=True)
class LinearDynamics:
    """Drift matrix A and noise matrix D of V̇ = AV + VAᵀ + D."""

    drift: NDArray[np.float64]
    noise: NDArray[np.float64]
    num_particles: int
    derived: DerivedQuantities
    coupling: float  # rad/s actually used (may differ from derived.coupling)

    @property
    def num_modes(self) -> int:
        return self.num_particles + 1

    def mode_labels(self) -> list[str]:
        return ["cav"] + [str(j + 1) for j in range(self.num_particles)]


def build_linear_dynamics(
    config: SystemConfig,
    *,
    coupling_override: float | None = None,
) -> LinearDynamics:
    """
    Assemble (A, D) for the cavity plus N identical particles.

    Row structure of A over (Q, P, x_j, p_j):
    Q̇ = ΔP − (κ/2)Q; Ṗ = −ΔQ − (κ/2)P − Σ_j 2g x_j;
    ẋ_j = ω p_j; ṗ_j = −ω x_j − γ p_j − 2g Q.
    D = diag(κ, κ, 0, 2γ(2n̄_th + 1), ...). A coupling override replaces the
    derived g with an explicit rad/s value (sweep axes); every other entry
    always comes from the physical derivation.
    """
    n = config.num_particles
    if n < 1:
        raise ValueError("need at least one particle")
    quantities = derive(config)
    omega = quantities.frequency
    g = quantities.coupling if coupling_override is None else coupling_override
    gamma = quantities.gas_damping
    n_th = quantities.thermal_occupation
    kappa = config.cavity.linewidth
    delta = config.cavity.detuning

    size = 2 * (n + 1)
    drift = np.zeros((size, size))
    drift[0, 0] = -0.5 * kappa
    drift[0, 1] = delta
    drift[1, 0] = -delta
    drift[1, 1] = -0.5 * kappa
    noise = np.zeros((size, size))
    noise[0, 0] = kappa
    noise[1, 1] = kappa
    for j in range(n):
        x = 2 + 2 * j
        p = x + 1
        drift[1, x] = -2.0 * g
        drift[x, p] = omega
        drift[p, x] = -omega
        drift[p, p] = -gamma
        drift[p, 0] = -2.0 * g
        noise[p, p] = 2.0 * gamma * (2.0 * n_th + 1.0)

    return LinearDynamics(
        drift=drift,
        noise=noise,
        num_particles=n,
        derived=quantities,
        coupling=g,
    )


def initial_state(
    config: SystemConfig,
    occupations: list[float] | None = None,
) -> GaussianState:
    """Cavity vacuum tensored with per-particle thermal states."""
    if occupations is None:
        omega = trap_frequencies(config.particle, config.tweezer)[0]
        occupations = [resolve_initial_occupation(config, omega)] * config.num_particles
    if len(occupations) != config.num_particles:
        raise ValueError("need one occupation per particle")
    return tensor(vacuum(1), thermal(occupations))
