"""
Time propagation, steady states, and stability for linear Gaussian dynamics.

The covariance obeys V̇ = AV + VAᵀ + D. Because A is time independent in
every scenario here, propagation uses the exact discrete update
V ← E V Eᵀ + W with E = exp(A dt) and W = ∫₀^dt exp(As) D exp(Aᵀs) ds; both
operators come out of one block matrix exponential, so the step carries no
truncation error at any dt.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np
from mpmath import mp
from numpy.typing import NDArray
from scipy.linalg import expm

from .gaussian import GaussianState, symplectic_form, symplectic_spectrum_of_cov
from .measures import (
    entropy_function,
    pair_log_negativity_cov,
    single_mode_entropy_cov,
    squeezing_degree_cov,
)
from .system import LinearDynamics

# Propagation physicality slack: looser than the static 1e-9 to absorb
# exponential-map rounding accumulated over ~1e4 steps.
EVOLUTION_SLACK = 1e-6

# A is Hurwitz (steady state exists) only if every real part is below this.
STABILITY_THRESHOLD = -1e-12

_MEASURE_SETS = ("full", "pairs", "none")


class UnstableSystemError(ValueError):
    """Raised when a steady state is requested for a non-Hurwitz A."""


@dataclass(frozen=True)
class StabilityReport:
    """Spectrum of A and the strict-Hurwitz verdict."""

    eigenvalues: tuple[complex, ...]
    max_real_part: float
    stable: bool

    def to_json_dict(self) -> dict:
        return {
            "eigenvalues": [[z.real, z.imag] for z in self.eigenvalues],
            "max_real_part": self.max_real_part,
            "stable": self.stable,
        }


def stability(dyn: LinearDynamics) -> StabilityReport:
    """Classify A: stable iff every eigenvalue real part < −1e-12."""
    eigenvalues = np.linalg.eigvals(dyn.drift)
    max_real = float(np.max(eigenvalues.real))
    return StabilityReport(
        eigenvalues=tuple(sorted(map(complex, eigenvalues), key=lambda z: (z.real, z.imag))),
        max_real_part=max_real,
        stable=bool(max_real < STABILITY_THRESHOLD),
    )


def exact_step_operators(
    drift: NDArray[np.float64], noise: NDArray[np.float64], dt: float
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """
    One-step propagator E = exp(A dt) and noise integral W(dt).

    Uses the block-exponential identity: for B = [[−A, D], [0, Aᵀ]]·dt,
    exp(B) has lower-right block exp(Aᵀ dt) and upper-right block
    exp(−A dt)·W, so W = exp(A dt) · (upper-right block).
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    n = drift.shape[0]
    block = np.zeros((2 * n, 2 * n))
    block[:n, :n] = -drift
    block[:n, n:] = noise
    block[n:, n:] = drift.T
    exp_block = expm(block * dt)
    propagator = exp_block[n:, n:].T
    noise_step = propagator @ exp_block[:n, n:]
    noise_step = 0.5 * (noise_step + noise_step.T)
    return propagator, noise_step


def measure_columns(dyn: LinearDynamics, measure_set: str) -> list[str]:
    """CSV column names (after 't') produced for a measure set."""
    if measure_set not in _MEASURE_SETS:
        raise ValueError(f"unknown measure set {measure_set!r}")
    if measure_set == "none":
        return []
    labels = dyn.mode_labels()
    pair_cols = [f"ln_{a}_{b}" for a, b in combinations(labels, 2)]
    if measure_set == "pairs":
        return pair_cols
    single_cols = [f"s_{lab}" for lab in labels]
    rest_cols = [f"s_rest_{lab}" for lab in labels]
    eta_cols = [f"eta_{lab}" for lab in labels[1:]]
    return pair_cols + ["nu_min", "s_total"] + single_cols + rest_cols + [
        "mi_total",
        "mi_particles",
    ] + eta_cols


def _full_measures(cov: NDArray[np.float64], num_modes: int) -> list[float]:
    """Everything beyond the pair LNs; one global + per-complement spectra."""
    nu = symplectic_spectrum_of_cov(cov)
    nu_min = float(nu[0])
    s_total = float(sum(entropy_function(v) for v in nu))
    singles = [single_mode_entropy_cov(cov, m) for m in range(num_modes)]
    rests = []
    for m in range(num_modes):
        keep = [k for k in range(num_modes) if k != m]
        idx = np.asarray([i for k in keep for i in (2 * k, 2 * k + 1)])
        rest_nu = symplectic_spectrum_of_cov(cov[np.ix_(idx, idx)])
        rests.append(float(sum(entropy_function(v) for v in rest_nu)))
    mi_total = sum(singles) - s_total
    p_idx = np.arange(2, 2 * num_modes)
    particles_nu = symplectic_spectrum_of_cov(cov[np.ix_(p_idx, p_idx)])
    s_particles = float(sum(entropy_function(v) for v in particles_nu))
    mi_particles = sum(singles[1:]) - s_particles
    etas = [squeezing_degree_cov(cov, m) for m in range(1, num_modes)]
    return [nu_min, s_total, *singles, *rests, mi_total, mi_particles, *etas]


def _sample_measures(
    cov: NDArray[np.float64], num_modes: int, measure_set: str
) -> list[float]:
    if measure_set == "none":
        return []
    values = [
        pair_log_negativity_cov(cov, j, k)[1] for j, k in combinations(range(num_modes), 2)
    ]
    if measure_set == "full":
        values.extend(_full_measures(cov, num_modes))
    return values


@dataclass(frozen=True)
class Trajectory:
    """Time-indexed states and measures from one propagation run."""

    times: NDArray[np.float64]
    means: NDArray[np.float64]
    covs: NDArray[np.float64]
    measure_names: tuple[str, ...]
    measures: NDArray[np.float64]  # shape (len(times), len(measure_names))
    mode_labels: tuple[str, ...]

    def state(self, index: int) -> GaussianState:
        return GaussianState(mean=self.means[index], cov=self.covs[index])

    def column(self, name: str) -> NDArray[np.float64]:
        try:
            at = self.measure_names.index(name)
        except ValueError as exc:
            raise KeyError(f"no measure column {name!r}") from exc
        return self.measures[:, at]

    def final_state(self) -> GaussianState:
        return self.state(len(self.times) - 1)


def evolve(
    dyn: LinearDynamics,
    initial: GaussianState,
    t_final: float,
    dt: float,
    *,
    measure_set: str = "full",
    physicality_slack: float = EVOLUTION_SLACK,
) -> Trajectory:
    """
    Propagate from `initial` to t_final in exact steps of dt.

    Samples (state + requested measures) are stored at every step including
    t = 0. Covariances are re-symmetrized each step; a sample whose smallest
    symplectic eigenvalue drops below 1 − physicality_slack aborts the run
    with a diagnostic.

    The physicality verdict, and every measure built on the symplectic
    spectrum, carries absolute meaning only while eps·max|V| stays below the
    slack; an amplifying system eventually pushes the unit-scale structure
    under the rounding floor. Past that point the run aborts (the measures
    would be noise) unless measure_set is "none", in which case stepping
    continues without any physicality claim. pair_ln_trace_extended covers
    the amplified regime.
    """
    if dt <= 0 or t_final < dt:
        raise ValueError("need dt > 0 and t_final >= dt")
    size = dyn.drift.shape[0]
    if initial.mean.shape[0] != size:
        raise ValueError(
            f"state dimension {initial.mean.shape[0]} does not match dynamics {size}"
        )
    if measure_set not in _MEASURE_SETS:
        raise ValueError(f"unknown measure set {measure_set!r}")

    num_steps = int(round(t_final / dt))
    times = np.arange(num_steps + 1) * dt
    propagator, noise_step = exact_step_operators(dyn.drift, dyn.noise, dt)

    num_modes = size // 2
    names = tuple(measure_columns(dyn, measure_set))
    means = np.empty((num_steps + 1, size))
    covs = np.empty((num_steps + 1, size, size))
    measures = np.empty((num_steps + 1, len(names)))

    nu_at = names.index("nu_min") if measure_set == "full" else -1
    eps = float(np.finfo(np.float64).eps)
    mean = initial.mean.copy()
    cov = initial.cov.copy()
    for step in range(num_steps + 1):
        if step > 0:
            mean = propagator @ mean
            cov = propagator @ cov @ propagator.T + noise_step
            cov = 0.5 * (cov + cov.T)
        means[step] = mean
        covs[step] = cov
        scale = float(np.max(np.abs(cov)))
        if eps * max(1.0, scale) > physicality_slack:
            if measure_set == "none":
                continue
            raise ValueError(
                f"covariance scale {scale:.3e} at t = {times[step]:.3e} s puts "
                f"the symplectic spectrum below the double-precision rounding "
                f"floor for slack {physicality_slack:g}; use "
                f"pair_ln_trace_extended for amplifying systems"
            )
        if measure_set == "full":
            # the full set already contains the global spectrum's minimum
            measures[step] = _sample_measures(cov, num_modes, measure_set)
            if measures[step, nu_at] < 1.0 - physicality_slack:
                raise ValueError(
                    f"non-physical state at t = {times[step]:.3e} s: "
                    f"min symplectic eigenvalue {measures[step, nu_at]:.6e}"
                )
        else:
            nu_min = float(symplectic_spectrum_of_cov(cov)[0])
            if nu_min < 1.0 - physicality_slack:
                raise ValueError(
                    f"non-physical state at t = {times[step]:.3e} s: "
                    f"min symplectic eigenvalue {nu_min:.6e}"
                )
            measures[step] = _sample_measures(cov, num_modes, measure_set)

    return Trajectory(
        times=times,
        means=means,
        covs=covs,
        measure_names=names,
        measures=measures,
        mode_labels=tuple(dyn.mode_labels()),
    )


def _pair_ln_mp(cov, idx: tuple[int, int, int, int]) -> float:
    """Determinant-form pair LN evaluated on an mpmath covariance matrix."""
    xj, pj, xk, pk = idx
    a = cov[xj, xj] * cov[pj, pj] - cov[xj, pj] * cov[pj, xj]
    b = cov[xk, xk] * cov[pk, pk] - cov[xk, pk] * cov[pk, xk]
    c = cov[xj, xk] * cov[pj, pk] - cov[xj, pk] * cov[pj, xk]
    sub = mp.matrix(4)
    for r, row in enumerate(idx):
        for s, col in enumerate(idx):
            sub[r, s] = cov[row, col]
    sigma = a + b - 2 * c
    disc = sigma * sigma - 4 * mp.det(sub)
    if disc < 0:
        raise ValueError(f"non-physical two-mode block: discriminant {float(disc):.3e}")
    nu_sq = (sigma - mp.sqrt(disc)) / 2
    if nu_sq < 0:
        raise ValueError(f"non-physical two-mode block: ν̃² = {float(nu_sq):.3e}")
    if nu_sq == 0:
        return math.inf
    return max(0.0, float(-mp.log(nu_sq) / 2))


def pair_ln_trace_extended(
    dyn: LinearDynamics,
    initial: GaussianState,
    t_final: float,
    dt: float,
    *,
    pairs: Sequence[tuple[int, int]] = ((1, 2),),
    digits: int | None = None,
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """
    Pair log-negativity traces carried in software floats.

    Amplifying systems outgrow double precision long before a 20 μs window
    closes: once covariance entries pass ~1e10, the unit-scale partial
    transpose structure that decides separability drops under the rounding
    floor and evolve() refuses to emit measures. This runs the same exact
    stepper and the same determinant formula with a mantissa wide enough for
    the window; the default width is sized from the spectral abscissa of A
    (the ν̃ extraction cancels ~2·log10 max|V| leading digits). Cost scales
    with the step count, so sample only as densely as the consumer needs:
    the stepper stays exact at any dt.

    Returns (times, traces) with traces[i, p] = LN(pairs[p]) at times[i].
    """
    if dt <= 0 or t_final < dt:
        raise ValueError("need dt > 0 and t_final >= dt")
    size = dyn.drift.shape[0]
    num_modes = size // 2
    for j, k in pairs:
        if j == k or min(j, k) < 0 or max(j, k) >= num_modes:
            raise ValueError(f"bad mode pair ({j}, {k})")
    if digits is None:
        growth = max(0.0, float(np.max(np.linalg.eigvals(dyn.drift).real)))
        decades = math.log10(max(1.0, float(np.max(np.abs(initial.cov))))) + (
            2.0 * growth * t_final / math.log(10.0)
        )
        digits = max(40, int(2.0 * decades) + 24)
    if digits > 600:
        raise ValueError(
            f"window amplification needs ~{digits} significant digits; "
            "shorten t_final or pass digits explicitly"
        )

    num_steps = int(round(t_final / dt))
    times = np.arange(num_steps + 1) * dt
    traces = np.empty((num_steps + 1, len(pairs)))
    indices = [(2 * j, 2 * j + 1, 2 * k, 2 * k + 1) for j, k in pairs]
    with mp.workdps(digits):
        dt_mp = mp.mpf(dt)
        block = mp.zeros(2 * size, 2 * size)
        for r in range(size):
            for c in range(size):
                block[r, c] = -mp.mpf(dyn.drift[r, c]) * dt_mp
                block[r, size + c] = mp.mpf(dyn.noise[r, c]) * dt_mp
                block[size + r, size + c] = mp.mpf(dyn.drift[c, r]) * dt_mp
        phi = mp.expm(block)
        propagator = mp.zeros(size, size)
        upper_right = mp.zeros(size, size)
        for r in range(size):
            for c in range(size):
                propagator[r, c] = phi[size + c, size + r]
                upper_right[r, c] = phi[r, size + c]
        noise_step = propagator * upper_right
        noise_step = (noise_step + noise_step.T) / 2
        cov = mp.matrix(initial.cov.tolist())
        for step in range(num_steps + 1):
            if step > 0:
                cov = propagator * cov * propagator.T + noise_step
                cov = (cov + cov.T) / 2
            for p, idx in enumerate(indices):
                traces[step, p] = _pair_ln_mp(cov, idx)
    return times, traces


def mean_is_zero_check(traj: Trajectory) -> bool:
    """True iff first moments stayed at zero (max |mean| < 1e-12)."""
    return bool(np.max(np.abs(traj.means)) < 1e-12)


def steady_state(
    dyn: LinearDynamics,
    *,
    residual_factor: float = 1e-10,
    max_refinements: int = 20,
) -> GaussianState:
    """
    Solve AV + VAᵀ + D = 0 for the steady covariance.

    Refuses unstable systems. Works on the vectorized form
    (A⊗I + I⊗A) vec V = −vec D with a dense LU solve, then iterative
    refinement whose residuals are accumulated in extended precision;
    the internal iterate converges below residual_factor·‖D‖_max.

    The returned covariance is necessarily the float64 rounding of that
    iterate. When V spans many decades (a dark mode thermalized to ~1e7
    against cavity entries of order 1) the rounding alone moves the
    residual to about ε·‖A‖·‖V‖, which can exceed the internal bound;
    the returned state is then still the best representable solution.
    steady_state_residual reports what the rounded state achieves.
    """
    report = stability(dyn)
    if not report.stable:
        raise UnstableSystemError(
            "no steady state: drift spectrum reaches real part "
            f"{report.max_real_part:.3e} (need < {STABILITY_THRESHOLD:.0e})"
        )
    drift, noise = dyn.drift, dyn.noise
    noise_scale = float(np.max(np.abs(noise)))
    if noise_scale == 0.0:
        return GaussianState(
            mean=np.zeros(drift.shape[0]), cov=np.zeros_like(drift)
        )  # pragma: no cover - D = 0 with Hurwitz A decays to nothing
    bound = residual_factor * noise_scale

    size = drift.shape[0]
    eye = np.eye(size)
    system = np.kron(drift, eye) + np.kron(eye, drift)
    try:
        solution = np.linalg.solve(system, -noise.reshape(-1))
    except np.linalg.LinAlgError as exc:  # pragma: no cover - barred by stability
        raise ArithmeticError(f"singular steady-state system: {exc}") from exc

    # Refinement: residuals in extended precision, corrections in float64.
    system_ext = system.astype(np.longdouble)
    noise_ext = noise.reshape(-1).astype(np.longdouble)
    iterate = solution.astype(np.longdouble)
    best = iterate.copy()
    best_residual = np.inf
    for _ in range(max_refinements):
        residual_ext = system_ext @ iterate + noise_ext
        achieved = float(np.max(np.abs(residual_ext)))
        if achieved < best_residual:
            best_residual = achieved
            best = iterate.copy()
        if achieved < bound:
            break
        correction = np.linalg.solve(system, np.asarray(residual_ext, dtype=np.float64))
        iterate = iterate - correction

    cov = np.asarray(best, dtype=np.float64).reshape(size, size)
    cov = 0.5 * (cov + cov.T)
    state = GaussianState(mean=np.zeros(size), cov=cov)
    state.require_physical(EVOLUTION_SLACK)
    return state


def steady_state_residual(dyn: LinearDynamics, state: GaussianState) -> float:
    """Max-abs residual of AV + VAᵀ + D for a candidate steady state."""
    cov = state.cov
    return float(np.max(np.abs(dyn.drift @ cov + cov @ dyn.drift.T + dyn.noise)))


def residual_precision_floor(dyn: LinearDynamics, state: GaussianState) -> float:
    """
    Residual scale set by float64 rounding of this covariance.

    Rounding V entrywise perturbs AV + VAᵀ by up to ε·(|A||V| + |V||Aᵀ|),
    so no stored solution can beat this scale; compare achieved residuals
    against max(requested bound, this floor).
    """
    amplification = np.abs(dyn.drift) @ np.abs(state.cov)
    amplification = amplification + np.abs(state.cov) @ np.abs(dyn.drift.T)
    return float(np.finfo(np.float64).eps * np.max(amplification))


def count_threshold_cycles(
    values: NDArray[np.float64], threshold: float = 1e-6
) -> int:
    """
    Count complete rise-fall cycles of a series against a threshold.

    A cycle is a crossing above `threshold` followed by a return to or below
    it; a final excursion still above threshold at the end of the series is
    not counted as complete.
    """
    above = np.asarray(values) > threshold
    births = np.flatnonzero(~above[:-1] & above[1:])
    deaths = np.flatnonzero(above[:-1] & ~above[1:])
    if above[0]:
        births = np.concatenate([[-1], births])
    return int(sum(1 for b in births if np.any(deaths > b)))


__all__ = [
    "EVOLUTION_SLACK",
    "STABILITY_THRESHOLD",
    "StabilityReport",
    "Trajectory",
    "UnstableSystemError",
    "count_threshold_cycles",
    "evolve",
    "exact_step_operators",
    "mean_is_zero_check",
    "measure_columns",
    "pair_ln_trace_extended",
    "residual_precision_floor",
    "stability",
    "steady_state",
    "steady_state_residual",
    "symplectic_form",
]
