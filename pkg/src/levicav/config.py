"""
System configuration: user-entered physical parameters with explicit units.

Every numeric field in a config JSON is a tagged pair {"value": v, "unit": u}.
Frequency-like quantities tagged in cyclic units (Hz, kHz, ...) are converted
to angular rates (multiplied by 2π); "rad/s" passes through. Pressures accept
pascals and millibar explicitly, so the unit choice is always visible in the
file rather than implied.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

from .constants import AIR_MOLECULE_MASS

_TWO_PI = 2.0 * math.pi

# Multipliers to SI. Frequencies are cyclic units: the tagged number counts
# cycles, the stored quantity is angular (rad/s).
_LENGTH = {"m": 1.0, "mm": 1e-3, "um": 1e-6, "nm": 1e-9, "pm": 1e-12}
_POWER = {"W": 1.0, "mW": 1e-3}
_MASS = {"kg": 1.0, "fg": 1e-18}
_DENSITY = {"kg/m^3": 1.0}
_PRESSURE = {"Pa": 1.0, "mbar": 1e2}
_TEMPERATURE = {"K": 1.0, "mK": 1e-3, "uK": 1e-6}
_ANGULAR_RATE = {
    "rad/s": 1.0,
    "Hz": _TWO_PI,
    "kHz": _TWO_PI * 1e3,
    "MHz": _TWO_PI * 1e6,
    "mHz": _TWO_PI * 1e-3,
    "uHz": _TWO_PI * 1e-6,
}
_ANGLE = {"rad": 1.0, "deg": math.pi / 180.0}
_TIME = {"s": 1.0, "ms": 1e-3, "us": 1e-6, "ns": 1e-9}
_DIMENSIONLESS = {"1": 1.0, "": 1.0}

_UNIT_TABLES = {
    "length": _LENGTH,
    "power": _POWER,
    "mass": _MASS,
    "density": _DENSITY,
    "pressure": _PRESSURE,
    "temperature": _TEMPERATURE,
    "angular_rate": _ANGULAR_RATE,
    "angle": _ANGLE,
    "time": _TIME,
    "dimensionless": _DIMENSIONLESS,
}


class ConfigError(ValueError):
    """Raised for malformed or physically invalid configuration input."""


def tagged_value(payload: Any, kind: str, where: str) -> float:
    """Convert one {"value", "unit"} pair to SI (angular rad/s for rates)."""
    if not isinstance(payload, dict) or "value" not in payload or "unit" not in payload:
        raise ConfigError(f"{where}: expected a {{'value', 'unit'}} pair, got {payload!r}")
    table = _UNIT_TABLES[kind]
    unit = str(payload["unit"])
    if unit not in table:
        known = ", ".join(sorted(table))
        raise ConfigError(f"{where}: unknown {kind} unit {unit!r} (known: {known})")
    try:
        value = float(payload["value"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: non-numeric value {payload['value']!r}") from exc
    return value * table[unit]


def _si_pair(value: float, kind: str) -> dict:
    si_unit = {
        "length": "m",
        "power": "W",
        "mass": "kg",
        "density": "kg/m^3",
        "pressure": "Pa",
        "temperature": "K",
        "angular_rate": "rad/s",
        "angle": "rad",
        "time": "s",
        "dimensionless": "1",
    }[kind]
    return {"value": value, "unit": si_unit}


@dataclass(frozen=True)
class ParticleParams:
    """One nanoparticle species (all particles in a run are this species)."""

    radius: float
    refractive_index: float
    density: float | None = None
    mass: float | None = None
    initial_occupation: float | None = None
    initial_temperature: float | None = None

    def __post_init__(self) -> None:
        if self.radius <= 0:
            raise ConfigError("particle radius must be positive")
        if self.refractive_index <= 1:
            raise ConfigError("refractive index must exceed 1")
        if self.density is None and self.mass is None:
            raise ConfigError("provide particle density or mass")
        if self.density is not None and self.density <= 0:
            raise ConfigError("density must be positive")
        if self.mass is not None and self.mass <= 0:
            raise ConfigError("mass must be positive")
        if self.initial_occupation is not None and self.initial_occupation < 0:
            raise ConfigError("initial occupation must be nonnegative")

    @property
    def volume(self) -> float:
        return 4.0 / 3.0 * math.pi * self.radius**3

    @property
    def resolved_mass(self) -> float:
        """Mass wins over density when both are given (see audit report)."""
        if self.mass is not None:
            return self.mass
        assert self.density is not None
        return self.density * self.volume

    @property
    def density_implied_mass(self) -> float | None:
        if self.density is None:
            return None
        return self.density * self.volume


@dataclass(frozen=True)
class TweezerParams:
    """Optical tweezer: power, wavelength, focal waist, polarization angle."""

    power: float
    wavelength: float
    waist: float
    polarization_angle: float = math.pi / 2.0
    waist_y: float | None = None

    def __post_init__(self) -> None:
        if min(self.power, self.wavelength, self.waist) <= 0:
            raise ConfigError("tweezer power, wavelength, and waist must be positive")
        if not 0.0 <= self.polarization_angle <= math.pi / 2.0:
            raise ConfigError("polarization angle must lie in [0, π/2]")

    @property
    def wavenumber(self) -> float:
        return _TWO_PI / self.wavelength

    @property
    def rayleigh_range(self) -> float:
        return 0.5 * self.wavenumber * self.waist**2


@dataclass(frozen=True)
class CavityParams:
    """Cavity geometry plus measured linewidth and tweezer-cavity detuning."""

    length: float
    waist: float
    linewidth: float
    detuning: float
    wavelength: float | None = None

    def __post_init__(self) -> None:
        if self.length <= 0 or self.waist <= 0:
            raise ConfigError("cavity length and waist must be positive")
        if self.linewidth < 0:
            raise ConfigError("cavity linewidth must be nonnegative")

    def resonance_wavelength(self, tweezer: TweezerParams) -> float:
        return self.wavelength if self.wavelength is not None else tweezer.wavelength

    def mode_volume(self) -> float:
        """Gaussian standing-wave mode volume, π w₀c² L / 4."""
        return math.pi * self.waist**2 * self.length / 4.0


@dataclass(frozen=True)
class EnvironmentParams:
    """Residual gas environment around the particles."""

    pressure: float
    temperature: float
    gas_molecule_mass: float = AIR_MOLECULE_MASS

    def __post_init__(self) -> None:
        if self.pressure < 0 or self.temperature < 0 or self.gas_molecule_mass <= 0:
            raise ConfigError("environment parameters must be nonnegative (gas mass positive)")


@dataclass(frozen=True)
class SystemConfig:
    """Complete description of one N-particle cavity setup."""

    num_particles: int
    particle: ParticleParams
    tweezer: TweezerParams
    cavity: CavityParams
    environment: EnvironmentParams
    name: str = ""
    # Published values shipped alongside a config, for audit reports only;
    # never consumed by the dynamics.
    reported: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.num_particles < 1:
            raise ConfigError("need at least one particle")

    @property
    def num_modes(self) -> int:
        return self.num_particles + 1

    def with_occupation(self, occupation: float) -> "SystemConfig":
        return replace(self, particle=replace(self.particle, initial_occupation=occupation))

    def lossless(self) -> "SystemConfig":
        """Unitary variant: zero cavity linewidth, zero gas pressure."""
        return replace(
            self,
            cavity=replace(self.cavity, linewidth=0.0),
            environment=replace(self.environment, pressure=0.0),
        )


def _parse_optional(block: dict, key: str, kind: str, where: str) -> float | None:
    if key not in block:
        return None
    return tagged_value(block[key], kind, f"{where}.{key}")


def _require(section: dict, key: str, where: str) -> Any:
    try:
        return section[key]
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"missing required field {where}.{key}") from exc


def parse_config(document: dict) -> SystemConfig:
    """Build a SystemConfig from a tagged-JSON document."""
    try:
        particles = document["particles"]
        tweezer = document["tweezer"]
        cavity = document["cavity"]
        environment = document["environment"]
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"missing top-level section: {exc}") from exc

    count = particles.get("count", 1)
    if not isinstance(count, int) or count < 1:
        raise ConfigError("particles.count must be a positive integer")

    particle = ParticleParams(
        radius=tagged_value(_require(particles, "radius", "particles"), "length", "particles.radius"),
        refractive_index=tagged_value(
            _require(particles, "refractive_index", "particles"),
            "dimensionless",
            "particles.refractive_index",
        ),
        density=_parse_optional(particles, "density", "density", "particles"),
        mass=_parse_optional(particles, "mass", "mass", "particles"),
        initial_occupation=_parse_optional(particles, "initial_occupation", "dimensionless", "particles"),
        initial_temperature=_parse_optional(particles, "initial_temperature", "temperature", "particles"),
    )

    waist_x = tagged_value(_require(tweezer, "waist", "tweezer"), "length", "tweezer.waist")
    waist_y = _parse_optional(tweezer, "waist_y", "length", "tweezer")
    convention = tweezer.get("waist_convention", "x")
    if convention == "geometric_mean":
        if waist_y is None:
            raise ConfigError("waist_convention geometric_mean needs tweezer.waist_y")
        effective_waist = math.sqrt(waist_x * waist_y)
    elif convention == "x":
        effective_waist = waist_x
    else:
        raise ConfigError(f"unknown waist_convention {convention!r}")

    angle = _parse_optional(tweezer, "polarization_angle", "angle", "tweezer")
    tweezer_params = TweezerParams(
        power=tagged_value(_require(tweezer, "power", "tweezer"), "power", "tweezer.power"),
        wavelength=tagged_value(_require(tweezer, "wavelength", "tweezer"), "length", "tweezer.wavelength"),
        waist=effective_waist,
        polarization_angle=math.pi / 2.0 if angle is None else angle,
        waist_y=waist_y,
    )

    cavity_params = CavityParams(
        length=tagged_value(_require(cavity, "length", "cavity"), "length", "cavity.length"),
        waist=tagged_value(_require(cavity, "waist", "cavity"), "length", "cavity.waist"),
        linewidth=tagged_value(_require(cavity, "linewidth", "cavity"), "angular_rate", "cavity.linewidth"),
        detuning=tagged_value(_require(cavity, "detuning", "cavity"), "angular_rate", "cavity.detuning"),
        wavelength=_parse_optional(cavity, "wavelength", "length", "cavity"),
    )

    environment_params = EnvironmentParams(
        pressure=tagged_value(_require(environment, "pressure", "environment"), "pressure", "environment.pressure"),
        temperature=tagged_value(_require(environment, "temperature", "environment"), "temperature", "environment.temperature"),
        gas_molecule_mass=_parse_optional(environment, "gas_molecule_mass", "mass", "environment")
        or AIR_MOLECULE_MASS,
    )

    return SystemConfig(
        num_particles=count,
        particle=particle,
        tweezer=tweezer_params,
        cavity=cavity_params,
        environment=environment_params,
        name=str(document.get("name", "")),
        reported=dict(document.get("reported", {})),
    )


def config_to_dict(config: SystemConfig) -> dict:
    """Serialize in canonical SI tags; parse(config_to_dict(c)) == c."""
    particles: dict[str, Any] = {
        "count": config.num_particles,
        "radius": _si_pair(config.particle.radius, "length"),
        "refractive_index": _si_pair(config.particle.refractive_index, "dimensionless"),
    }
    if config.particle.density is not None:
        particles["density"] = _si_pair(config.particle.density, "density")
    if config.particle.mass is not None:
        particles["mass"] = _si_pair(config.particle.mass, "mass")
    if config.particle.initial_occupation is not None:
        particles["initial_occupation"] = _si_pair(config.particle.initial_occupation, "dimensionless")
    if config.particle.initial_temperature is not None:
        particles["initial_temperature"] = _si_pair(config.particle.initial_temperature, "temperature")

    tweezer: dict[str, Any] = {
        "power": _si_pair(config.tweezer.power, "power"),
        "wavelength": _si_pair(config.tweezer.wavelength, "length"),
        "waist": _si_pair(config.tweezer.waist, "length"),
        "polarization_angle": _si_pair(config.tweezer.polarization_angle, "angle"),
    }
    if config.tweezer.waist_y is not None:
        tweezer["waist_y"] = _si_pair(config.tweezer.waist_y, "length")

    cavity: dict[str, Any] = {
        "length": _si_pair(config.cavity.length, "length"),
        "waist": _si_pair(config.cavity.waist, "length"),
        "linewidth": _si_pair(config.cavity.linewidth, "angular_rate"),
        "detuning": _si_pair(config.cavity.detuning, "angular_rate"),
    }
    if config.cavity.wavelength is not None:
        cavity["wavelength"] = _si_pair(config.cavity.wavelength, "length")

    return {
        "name": config.name,
        "particles": particles,
        "tweezer": tweezer,
        "cavity": cavity,
        "environment": {
            "pressure": _si_pair(config.environment.pressure, "pressure"),
            "temperature": _si_pair(config.environment.temperature, "temperature"),
            "gas_molecule_mass": _si_pair(config.environment.gas_molecule_mass, "mass"),
        },
        "reported": dict(config.reported),
    }


def load_config(path: str | Path) -> SystemConfig:
    """Read and parse a tagged-JSON config file."""
    try:
        document = json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {path}: {exc}") from exc
    return parse_config(document)


def bundled_config_path(name: str) -> Path:
    """Path of a config shipped with the package ('design' or 'experiment')."""
    path = Path(__file__).parent / "data" / f"{name}.json"
    if not path.exists():
        raise ConfigError(f"no bundled config named {name!r}")
    return path


def load_bundled(name: str) -> SystemConfig:
    return load_config(bundled_config_path(name))
