"""
End-to-end acceptance gate.

One test per numbered criterion, each emitting a single [Cxx] PASS/FAIL line
(echoed again in the terminal summary). Every expected number is either a
published target with its stated tolerance or re-derived in place by an
independent oracle; runtime budgets are asserted alongside the physics.

Two clauses are known to sit beyond reach and fail honestly rather than be
weakened: the lossless demo's second entanglement death (the trough between
revivals stays near 4e-3, far above the 1e-6 threshold, confirmed by an
independent high-order integrator) and the steady-state residual bound
1e-10·max|D| (below the float64 rounding floor for covariance entries of
order 2e7). Both carry the measured numbers in their failure messages.
"""

import json
import math
import time
from pathlib import Path

import numpy as np

from conftest import record_criterion
from levicav import (
    GaussianState,
    build_linear_dynamics,
    closed_form_rates,
    coupling_strength,
    derive,
    evolve,
    initial_state,
    load_bundled,
    log_negativity,
    partial_trace,
    symplectic_eigenvalues,
    tensor,
    thermal,
    trap_frequencies,
    vacuum,
    wigner,
)
from levicav.audit import write_reports
from levicav.config import ParticleParams, TweezerParams
from levicav.experiments import (
    ScenarioSpec,
    run_coupling_sweep,
    run_particle_number_sweep,
    run_squeezing_snapshot,
    run_steady_report,
    run_temperature_sweep,
    run_unitary_demo,
)
from oracles import (
    pt_nu_tilde_min,
    random_physical_cov,
    random_symplectic,
    rk4_covariance,
)


def _emit(tag: str, ok: bool, detail: str) -> str:
    line = f"[{tag}] {'PASS' if ok else 'FAIL'} {detail}"
    print(line)
    record_criterion(line)
    return line


def _check_map(result):
    return {c.name: c for c in result.checks}


def test_c01_derivation_fidelity(experiment_config):
    d = derive(experiment_config)
    omega_target = 2.0 * math.pi * 305e3
    omega_gap = abs(d.frequency - omega_target) / omega_target
    zpf_gap = abs(d.x_zpf - 3.1e-12) / 3.1e-12
    ok = omega_gap < 0.01 and zpf_gap < 0.03
    line = _emit(
        "C01",
        ok,
        f"trap frequency 2pi x {d.frequency / 2 / math.pi / 1e3:.1f} kHz "
        f"(gap {omega_gap:.2%} of 305 kHz, gate 1%); "
        f"x_zpf {d.x_zpf * 1e12:.3f} pm (gap {zpf_gap:.2%} of 3.1 pm, gate 3%)",
    )
    assert ok, line


def test_c02_coupling_reproduction(design_derived):
    target = 2.0 * math.pi * 109.8e3
    gap = abs(design_derived.coupling - target) / target
    ok = gap < 0.10
    line = _emit(
        "C02",
        ok,
        f"coupling 2pi x {design_derived.coupling / 2 / math.pi / 1e3:.1f} kHz "
        f"(gap {gap:.2%} of 109.8 kHz, gate 10%)",
    )
    assert ok, line


def test_c03_unitary_suite(design_config, tmp_path):
    started = time.perf_counter()
    spec = ScenarioSpec(config=design_config, out_dir=tmp_path, t_final=2e-5, dt=1e-9)
    result = run_unitary_demo(spec)
    elapsed = time.perf_counter() - started
    checks = _check_map(result)
    purity_ok = checks["global_purity_preserved"].passed
    entropy_ok = checks["entropy_complement_equality"].passed
    cycles_ok = checks["ln_completes_two_cycles"].passed
    ok = purity_ok and entropy_ok and cycles_ok
    line = _emit(
        "C03",
        ok,
        f"purity |nu-1| max {result.summary['purity_deviation']:.2e} (gate 1e-6); "
        f"entropy gap {result.summary['entropy_complement_gap']:.2e} (gate 1e-6); "
        f"cycles {result.summary['cycles']} (need 2, interior trough "
        f"{result.summary['interior_trough_ln_1_2']:.2e}); {elapsed:.1f}s/10s",
    )
    assert elapsed < 10.0, line
    assert purity_ok and entropy_ok, line
    assert cycles_ok, line


def test_c04_oracle_equivalence(design_config):
    started = time.perf_counter()
    dyn = build_linear_dynamics(design_config)
    start = initial_state(design_config)
    t_final, dt = 2e-5, 1e-8
    traj = evolve(dyn, start, t_final, dt, measure_set="none")
    oracle = rk4_covariance(dyn.drift, dyn.noise, start.cov, t_final, dt / 10.0)
    gap = float(np.max(np.abs(traj.covs[-1] - oracle)))
    elapsed = time.perf_counter() - started
    ok = gap < 1e-8 and elapsed < 30.0
    line = _emit(
        "C04",
        ok,
        f"exact stepper vs order-4 integrator at dt/10: max |dV| = {gap:.2e} "
        f"(gate 1e-8); {elapsed:.1f}s/30s",
    )
    assert ok, line


def test_c05_steady_state(design_config, tmp_path):
    started = time.perf_counter()
    spec = ScenarioSpec(config=design_config, out_dir=tmp_path)
    result = run_steady_report(spec)
    elapsed = time.perf_counter() - started
    s = result.summary
    strict = bool(s["strict_bound_met"])
    drift_ok = s["evolution_drift"] < 1e-6
    ln_ok = all(v == 0.0 for v in s["pairwise_ln"].values())
    mi_total_ok = abs(s["mi_total"] - 16.3) / 16.3 < 0.25
    mi_particles_ok = abs(s["mi_particles"] - 15.1) / 15.1 < 0.25
    ok = strict and drift_ok and ln_ok and mi_total_ok and mi_particles_ok
    line = _emit(
        "C05",
        ok,
        f"residual {s['residual']:.2e} vs strict bound {s['residual_bound']:.2e} "
        f"(float64 floor {s['residual_precision_floor']:.2e}); "
        f"march-back drift {s['evolution_drift']:.2e} (gate 1e-6); "
        f"pairwise ln all zero: {ln_ok}; "
        f"mi_total {s['mi_total']:.2f}/16.3, mi_particles {s['mi_particles']:.2f}/15.1 "
        f"(gate 25%); {elapsed:.1f}s/60s",
    )
    assert elapsed < 60.0, line
    assert drift_ok and ln_ok and mi_total_ok and mi_particles_ok, line
    assert strict, line


def test_c06_entanglement_threshold(design_config, tmp_path):
    started = time.perf_counter()
    spec = ScenarioSpec(config=design_config, out_dir=tmp_path)
    result = run_temperature_sweep(spec, grid_axis=[0.0])
    elapsed = time.perf_counter() - started
    s = result.summary
    threshold = s["threshold_occupation"]
    in_gate = threshold is not None and 0.12 <= threshold <= 0.20
    high_dead = s["diagonal_max_ln"][-1] < 1e-6 and s["diagonal"][-1] >= 0.43 - 1e-12
    ok = in_gate and high_dead and elapsed < 120.0
    line = _emit(
        "C06",
        ok,
        f"vanishing threshold n = {threshold} (gate [0.12, 0.20], published 0.16); "
        f"max ln at n=0.43 is {s['diagonal_max_ln'][-1]:.2e}; "
        f"{len(s['diagonal'])}-point diagonal in {elapsed:.1f}s/120s",
    )
    assert ok, line


def test_c07_coupling_sweep(design_config, tmp_path):
    started = time.perf_counter()
    spec = ScenarioSpec(config=design_config, out_dir=tmp_path)
    result = run_coupling_sweep(spec)
    elapsed = time.perf_counter() - started
    s = result.summary
    ratios = np.asarray(s["ratios"])
    maxima = np.asarray(s["max_ln"])
    fractions = np.asarray(s["positive_fraction"])
    weak_zero = float(np.max(maxima[ratios <= 0.2 + 1e-12])) < 1e-6
    design_ratio = s["design_ratio"]
    at_design = float(maxima[np.argmin(np.abs(ratios - design_ratio))])
    design_positive = at_design > 1e-6
    frac_design = float(fractions[np.argmin(np.abs(ratios - design_ratio))])
    frac_unity = float(fractions[np.argmin(np.abs(ratios - 1.0))])
    plateau = frac_unity > frac_design
    ok = weak_zero and design_positive and plateau and elapsed < 300.0
    line = _emit(
        "C07",
        ok,
        f"max ln at ratios <= 0.2: {float(np.max(maxima[ratios <= 0.2 + 1e-12])):.2e}; "
        f"ln at design ratio {design_ratio:.2f}: {at_design:.3f}; "
        f"positive fraction {frac_unity:.3f} at ratio 1.0 vs {frac_design:.3f} "
        f"at design; {len(ratios)} ratios in {elapsed:.0f}s/300s",
    )
    assert ok, line


def test_c08_squeezing(design_config, tmp_path):
    started = time.perf_counter()
    spec = ScenarioSpec(config=design_config, out_dir=tmp_path)
    result = run_squeezing_snapshot(spec)
    elapsed = time.perf_counter() - started
    s = result.summary
    checks = _check_map(result)
    start_ok = checks["eta_starts_at_one"].passed
    depth_ok = abs(s["eta_min"] - 0.23) <= 0.05
    when_ok = abs(s["eta_min_time_s"] - 5.7e-6) <= 1.5e-6
    steady_ok = all(v > 0.95 for v in s["eta_steady"])
    ok = start_ok and depth_ok and when_ok and steady_ok and elapsed < 30.0
    line = _emit(
        "C08",
        ok,
        f"eta(0) = 1 within 1e-9: {start_ok}; min eta {s['eta_min']:.3f} "
        f"(gate 0.23 +/- 0.05) at {s['eta_min_time_s'] * 1e6:.2f} us "
        f"(gate 5.7 +/- 1.5 us); steady eta {min(s['eta_steady']):.3f} > 0.95; "
        f"{elapsed:.1f}s/30s",
    )
    assert ok, line


def test_c09_dilution(design_config, tmp_path):
    started = time.perf_counter()
    spec = ScenarioSpec(config=design_config, out_dir=tmp_path, dt=1e-8)
    result = run_particle_number_sweep(spec, n_list=(2, 3, 4))
    elapsed = time.perf_counter() - started
    s = result.summary
    ordered = [s["max_ln_1_2"][str(n)] for n in (2, 3, 4)]
    diluting = all(b <= a for a, b in zip(ordered, ordered[1:]))
    spread = max(s["pair_spread"].values())
    symmetric = spread < 1e-10
    ok = diluting and symmetric and elapsed < 120.0
    line = _emit(
        "C09",
        ok,
        "max ln over [0, 4 us]: "
        + ", ".join(f"N={n}: {v:.4f}" for n, v in zip((2, 3, 4), ordered))
        + f"; pair spread {spread:.1e} (gate 1e-10); {elapsed:.1f}s/120s",
    )
    assert ok, line


def test_c10_property_suites(design_config):
    started = time.perf_counter()
    rng = np.random.default_rng(20260819)

    # gaussian-core invariants on >= 1000 randomized cases
    core_cases = 0
    for _ in range(350):
        num_modes = int(rng.integers(1, 4))
        cov = random_physical_cov(rng, num_modes)
        state = GaussianState(rng.normal(size=2 * num_modes), cov)
        state.require_physical()
        keep = sorted(
            rng.choice(num_modes, size=int(rng.integers(1, num_modes + 1)), replace=False)
        )
        reduced = partial_trace(state, keep)
        reduced.require_physical()
        sympl = random_symplectic(rng, num_modes)
        congruent = GaussianState(state.mean, sympl @ cov @ sympl.T)
        assert np.allclose(
            symplectic_eigenvalues(congruent),
            symplectic_eigenvalues(state),
            atol=1e-8,
        )
        core_cases += 3

    # formula vs eigen-oracle for the partially transposed spectrum
    nu_gap = 0.0
    for _ in range(1000):
        cov = random_physical_cov(rng, 2)
        formula = log_negativity(GaussianState(np.zeros(4), cov), 0, 1).nu_tilde_min
        nu_gap = max(nu_gap, abs(formula - pt_nu_tilde_min(cov, 0, 1)))

    # closed forms against constituent operations
    t = design_config.tweezer
    cav = design_config.cavity
    env = design_config.environment
    form_gap = 0.0
    for _ in range(100):
        radius = rng.uniform(40e-9, 140e-9)
        power = rng.uniform(0.05, 1.5)
        density = rng.uniform(1500.0, 3000.0)
        particle = ParticleParams(radius=radius, refractive_index=1.45, density=density)
        tw = TweezerParams(
            power=power, wavelength=t.wavelength, waist=t.waist,
            polarization_angle=t.polarization_angle,
        )
        omega = trap_frequencies(particle, tw)[0]
        bundle = closed_form_rates(
            radius, power, density,
            refractive_index=1.45,
            tweezer_waist=t.waist,
            tweezer_wavelength=t.wavelength,
            cavity_length=cav.length,
            cavity_waist=cav.waist,
            cavity_wavelength=cav.resonance_wavelength(t),
            pressure=env.pressure,
            gas_temperature=env.temperature,
            gas_molecule_mass=env.gas_molecule_mass,
        )
        g_direct = coupling_strength(particle, tw, cav, omega)
        form_gap = max(
            form_gap,
            abs(bundle.frequency - omega) / omega,
            abs(bundle.coupling - g_direct) / g_direct,
        )

    # Wigner normalization on a +/- 6 sigma grid
    grid = np.linspace(-6.0 * math.sqrt(1.2), 6.0 * math.sqrt(1.2), 201)
    w = wigner(thermal([0.1]), grid, grid)
    dx = grid[1] - grid[0]
    mass_gap = abs(float(np.sum(w)) * dx * dx - 1.0)

    elapsed = time.perf_counter() - started
    ok = (
        core_cases >= 1000
        and nu_gap < 1e-8
        and form_gap < 1e-6
        and mass_gap < 1e-3
        and elapsed < 120.0
    )
    line = _emit(
        "C10",
        ok,
        f"{core_cases} randomized state invariants; nu-oracle gap {nu_gap:.1e} "
        f"(gate 1e-8, 1000 states); closed-form gap {form_gap:.1e} "
        f"(gate 1e-6, 100 draws); Wigner mass gap {mass_gap:.1e} (gate 1e-3); "
        f"{elapsed:.1f}s/120s",
    )
    assert ok, line


def test_c11_discrepancy_report(design_config, experiment_config, tmp_path):
    # the three findings live with the configs that ship the relevant
    # reported values: pressure unit and tau with the design point, the
    # explicit-mass tension with the measured experiment
    derived_path, design_doc = write_reports(design_config, tmp_path / "design")
    _, experiment_doc = write_reports(experiment_config, tmp_path / "experiment")
    design_text = design_doc.read_text()
    lowered = design_text.lower()
    experiment_text = experiment_doc.read_text()
    pressure_finding = "pascal" in lowered and "millibar" in lowered
    tau_status = "14.816" in design_text or "14.82" in design_text
    mass_tension = "2.83" in experiment_text and (
        "3.37" in experiment_text or "3.368" in experiment_text
    )
    derived_json = json.loads(derived_path.read_text())
    derived_ok = derived_json["derived"]["coupling"]["rad_per_s"] > 0
    ok = pressure_finding and mass_tension and tau_status and derived_ok
    line = _emit(
        "C11",
        ok,
        f"pressure-unit finding stated: {pressure_finding}; "
        f"mass/density tension stated: {mass_tension}; "
        f"coherence-time status stated: {tau_status}",
    )
    assert ok, line
