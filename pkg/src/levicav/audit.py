"""
Derivation dumps and the parameter-audit document.

A configuration can ship a block of `reported` values alongside its physical
inputs. The audit derives everything independently, tabulates derived vs
reported, and writes a markdown note covering the known tensions: the
pressure-unit ambiguity behind the damping rate, explicit mass against
density-implied mass, and how well the coherence time is reproduced.
Nothing in here feeds back into the dynamics; it is reporting only.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from .config import SystemConfig, config_to_dict, tagged_value
from .system import (
    DerivedQuantities,
    derive,
    free_field_check,
    temperature_from_occupation,
)

_TWO_PI = 2.0 * math.pi

# Relative gap below which a reported number counts as reproduced. Matches
# the loosest tolerance used anywhere in the acceptance checks.
AUDIT_RTOL = 0.25


def _cycles(value: float, scale: float, unit: str) -> str:
    return f"2π × {value / (_TWO_PI * scale):.4g} {unit}"


def _khz(value: float) -> str:
    return _cycles(value, 1e3, "kHz")


def _uhz(value: float) -> str:
    return _cycles(value, 1e-6, "μHz")


def _us(value: float) -> str:
    return f"{value / 1e-6:.4g} μs"


def _pm(value: float) -> str:
    return f"{value / 1e-12:.4g} pm"


def _uk(value: float) -> str:
    return f"{value / 1e-6:.4g} μK"


def _plain(value: float) -> str:
    return f"{value:.4g}"


@dataclass(frozen=True)
class ComparisonRow:
    """Derived-vs-reported entry of the audit table."""

    quantity: str
    derived: float
    reported: float
    display: Callable[[float], str]

    @property
    def relative_gap(self) -> float:
        if self.reported == 0.0:
            return math.inf
        return abs(self.derived - self.reported) / abs(self.reported)

    @property
    def reproduced(self) -> bool:
        return self.relative_gap <= AUDIT_RTOL

    def to_json_dict(self) -> dict:
        return {
            "quantity": self.quantity,
            "derived_si": self.derived,
            "reported_si": self.reported,
            "relative_gap": self.relative_gap,
            "reproduced": self.reproduced,
        }


# reported-block key -> (unit kind, derived getter, display formatter)
_COMPARABLE: dict[str, tuple[str, Callable[[SystemConfig, DerivedQuantities], float], Callable[[float], str]]] = {
    "trap_frequency": ("angular_rate", lambda c, q: q.frequency, _khz),
    "coupling": ("angular_rate", lambda c, q: q.coupling, _khz),
    "damping": ("angular_rate", lambda c, q: q.gas_damping, _uhz),
    "zero_point_fluctuation": ("length", lambda c, q: q.x_zpf, _pm),
    "gas_heating_rate": ("angular_rate", lambda c, q: q.gas_decoherence, _khz),
    "recoil_heating_rate": ("angular_rate", lambda c, q: q.recoil_rate, _khz),
    "coherence_time": ("time", lambda c, q: q.coherence_time, _us),
    "initial_occupation": ("dimensionless", lambda c, q: q.initial_occupation, _plain),
    "initial_temperature": (
        "temperature",
        lambda c, q: temperature_from_occupation(q.initial_occupation, q.frequency),
        _uk,
    ),
}


def comparison_rows(config: SystemConfig, quantities: DerivedQuantities) -> list[ComparisonRow]:
    rows = []
    for key, (kind, getter, display) in _COMPARABLE.items():
        payload = config.reported.get(key)
        if payload is None:
            continue
        reported = tagged_value(payload, kind, f"reported.{key}")
        rows.append(ComparisonRow(key, getter(config, quantities), reported, display))
    return rows


@dataclass(frozen=True)
class PressureSensitivity:
    """Gas rates under the configured pressure and its two-decade neighbours."""

    factors: tuple[float, float, float]
    damping: tuple[float, float, float]
    gas_decoherence: tuple[float, float, float]
    coherence_time: tuple[float, float, float]


def pressure_sensitivity(quantities: DerivedQuantities) -> PressureSensitivity:
    """
    Rates if the configured pressure number were read two decades off.

    Gas damping is linear in pressure, so the mbar-vs-Pa ambiguity is exactly
    a factor of 100 on γ and Γ_gas while the recoil rate is untouched.
    """
    factors = (0.01, 1.0, 100.0)
    damping = tuple(quantities.gas_damping * f for f in factors)
    gas = tuple(quantities.gas_decoherence * f for f in factors)
    tau = tuple(1.0 / (g + quantities.recoil_rate) for g in gas)
    return PressureSensitivity(factors, damping, gas, tau)


def derivation_report(config: SystemConfig) -> dict:
    """JSON-ready dump of everything derived from one configuration."""
    quantities = derive(config)
    spread = free_field_check(
        config.particle, config.tweezer, occupation=quantities.initial_occupation
    )
    sensitivity = pressure_sensitivity(quantities)
    return {
        "name": config.name,
        "config": config_to_dict(config),
        "derived": quantities.to_json_dict(),
        "free_field": {
            "k_x_zpf": spread.k_x_zpf,
            "k_x_thermal": spread.k_x_thermal,
            "negligible": spread.negligible,
        },
        "pressure_sensitivity": {
            "factors": list(sensitivity.factors),
            "damping_rad_s": list(sensitivity.damping),
            "gas_decoherence_rad_s": list(sensitivity.gas_decoherence),
            "coherence_time_s": list(sensitivity.coherence_time),
        },
        "comparisons": [row.to_json_dict() for row in comparison_rows(config, quantities)],
    }


def _gap_word(row: ComparisonRow) -> str:
    return "reproduced" if row.reproduced else "NOT reproduced"


def discrepancy_document(config: SystemConfig) -> str:
    """Markdown audit of the reported values shipped with a configuration."""
    quantities = derive(config)
    rows = comparison_rows(config, quantities)
    by_key = {row.quantity: row for row in rows}
    sensitivity = pressure_sensitivity(quantities)

    lines: list[str] = []
    out = lines.append
    title = config.name or "unnamed configuration"
    out(f"# Parameter audit: {title}")
    out("")
    out(
        "Derived values come from the physical inputs alone; reported values "
        "are the ones shipped in the configuration's `reported` block. A row "
        f"counts as reproduced when the relative gap is at most {AUDIT_RTOL:.0%}."
    )
    out("")

    if rows:
        out("## Derived vs reported")
        out("")
        out("| quantity | derived | reported | gap | status |")
        out("|---|---|---|---|---|")
        for row in rows:
            out(
                f"| {row.quantity} | {row.display(row.derived)} "
                f"| {row.display(row.reported)} | {row.relative_gap:.1%} "
                f"| {_gap_word(row)} |"
            )
        out("")

    out("## Pressure-unit sensitivity of the gas rates")
    out("")
    out(
        "Gas damping is linear in pressure, so reading the same pressure "
        "number in mbar instead of Pa (or the reverse) moves γ and Γ_gas by "
        "exactly two decades while the photon-recoil rate stays fixed. "
        "Rates under the configured pressure and its two-decade neighbours:"
    )
    out("")
    out("| pressure scale | γ | Γ_gas | τ |")
    out("|---|---|---|---|")
    for f, damping, gas, tau in zip(
        sensitivity.factors,
        sensitivity.damping,
        sensitivity.gas_decoherence,
        sensitivity.coherence_time,
    ):
        marker = " (configured)" if f == 1.0 else ""
        out(f"| ×{f:g}{marker} | {_uhz(damping)} | {_khz(gas)} | {_us(tau)} |")
    out("")
    anchor = by_key.get("damping") or by_key.get("gas_heating_rate")
    published = config.reported.get("pressure_as_published")
    if published is not None:
        published_si = tagged_value(
            published, "pressure", "reported.pressure_as_published"
        )
        configured_si = config.environment.pressure
        unit = str(published["unit"])
        unit_word = {"Pa": "pascal", "mbar": "millibar"}.get(unit, unit)
        if math.isclose(published_si, configured_si, rel_tol=1e-9):
            out(
                f"The pressure as published, {published['value']:g} {unit} "
                f"({unit_word}), equals the configured {configured_si:g} Pa "
                "(pascal) once converted; there is no unit question here."
            )
        else:
            factor = published_si / configured_si
            out(
                f"The pressure as published reads {published['value']:g} {unit} "
                f"({unit_word}), but this configuration takes the numeral in "
                f"pascal: {configured_si:g} Pa, a factor of {factor:g} apart "
                "once converted."
            )
            if anchor is not None:
                gap_configured = anchor.relative_gap
                gap_published = (
                    abs(anchor.derived * factor - anchor.reported)
                    / abs(anchor.reported)
                )
                pascal_wins = gap_configured <= gap_published
                closer = "pascal" if pascal_wins else unit_word
                miss = factor if pascal_wins else 1.0 / factor
                out("")
                out(
                    f"The reported {anchor.quantity} sits "
                    f"{min(gap_configured, gap_published):.1%} from the "
                    f"{closer} reading, while the other reading misses it by "
                    f"a factor of {miss:g}. Every rate derived here uses the "
                    f"{closer} reading."
                )
        out("")
    elif anchor is not None:
        gaps = [
            abs(d - anchor.reported) / abs(anchor.reported)
            for d in (
                sensitivity.damping
                if anchor.quantity == "damping"
                else sensitivity.gas_decoherence
            )
        ]
        best = min(range(3), key=lambda i: gaps[i])
        scale = sensitivity.factors[best]
        if scale == 1.0:
            out(
                f"The reported {anchor.quantity} sits {gaps[best]:.1%} from the "
                "configured reading and two decades from either alternative: "
                "the configured pressure unit is the consistent one."
            )
        else:
            out(
                f"The reported {anchor.quantity} is closest to the ×{scale:g} "
                f"reading ({gaps[best]:.1%} away); the configured pressure unit "
                "looks inconsistent with the reported rate and should be "
                "double-checked."
            )
        out("")

    out("## Mass vs density")
    out("")
    implied = quantities.density_implied_mass
    explicit = config.particle.mass
    if explicit is not None and implied is not None:
        gap = abs(explicit - implied) / implied
        out(
            f"The configuration ships an explicit mass of {explicit * 1e18:.3g} fg "
            f"while radius and density imply {implied * 1e18:.3g} fg, a "
            f"{gap:.1%} tension. All derived quantities use the explicit mass; "
            "the implied mass would shift the trap frequency by "
            f"{(math.sqrt(explicit / implied) - 1.0):+.1%} and the zero-point "
            "spread accordingly."
        )
    elif explicit is not None:
        out("Only an explicit mass is given; there is no density to check it against.")
    else:
        out(
            "No explicit mass is shipped; the density-implied value "
            f"{(implied or 0.0) * 1e18:.3g} fg is used throughout."
        )
    out("")

    out("## Coherence-time reproduction")
    out("")
    tau_row = by_key.get("coherence_time")
    if tau_row is not None:
        out(
            f"Derived τ = {_us(tau_row.derived)} against the reported "
            f"{_us(tau_row.reported)}: gap {tau_row.relative_gap:.1%}, "
            f"{_gap_word(tau_row)}. τ is recoil-dominated at this pressure "
            "(see the sensitivity table above), so the residual gap tracks "
            "the waist and power inputs rather than the pressure reading."
        )
    else:
        out(f"No reported coherence time; the derived value is {_us(quantities.coherence_time)}.")
    out("")

    spread = free_field_check(
        config.particle, config.tweezer, occupation=quantities.initial_occupation
    )
    out("## Free-field spread check")
    out("")
    out(
        f"k_t·x_zpf = {spread.k_x_zpf:.3g} and k_t·sqrt⟨x²⟩ = "
        f"{spread.k_x_thermal:.3g} at the resolved initial occupation "
        f"{quantities.initial_occupation:.3g}; "
        + (
            "both are far below 1, so dropping the particle-free-field "
            "interaction from the dynamics is justified."
            if spread.negligible
            else "the spread is NOT negligible against the tweezer wavelength; "
            "the linearized model is questionable at this operating point."
        )
    )
    out("")

    if quantities.warnings:
        out("## Derivation warnings")
        out("")
        for warning in quantities.warnings:
            out(f"- {warning}")
        out("")

    return "\n".join(lines)


def write_reports(config: SystemConfig, out_dir: Path) -> tuple[Path, Path]:
    """Write derived.json and discrepancies.md; returns both paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    derived_path = out_dir / "derived.json"
    derived_path.write_text(
        json.dumps(derivation_report(config), indent=2, sort_keys=True) + "\n"
    )
    doc_path = out_dir / "discrepancies.md"
    doc_path.write_text(discrepancy_document(config))
    return derived_path, doc_path


__all__ = [
    "AUDIT_RTOL",
    "ComparisonRow",
    "PressureSensitivity",
    "comparison_rows",
    "derivation_report",
    "discrepancy_document",
    "pressure_sensitivity",
    "write_reports",
]
