import numpy as np
import pytest

from levicav import (
    GaussianState,
    build_linear_dynamics,
    evolve,
    initial_state,
    log_negativity,
    mutual_information,
    partial_trace,
    squeezing_degree,
    tensor,
    thermal,
    vacuum,
)
from levicav.measures import entropy_function
from oracles import pt_nu_tilde_min, random_physical_cov


def two_mode_squeezed(r: float) -> GaussianState:
    c, s = np.cosh(2.0 * r), np.sinh(2.0 * r)
    cov = np.block(
        [
            [c * np.eye(2), s * np.diag([1.0, -1.0])],
            [s * np.diag([1.0, -1.0]), c * np.eye(2)],
        ]
    )
    return GaussianState(np.zeros(4), cov)


def test_ln_vacuum_pair_zero():
    out = log_negativity(vacuum(2), 0, 1)
    assert out.log_negativity == 0.0
    assert out.nu_tilde_min == pytest.approx(1.0, abs=1e-12)


def test_ln_thermal_product_zero():
    out = log_negativity(thermal([0.1, 0.1]), 0, 1)
    assert out.log_negativity == 0.0
    assert out.nu_tilde_min == pytest.approx(1.2, abs=1e-12)


def test_ln_two_mode_squeezed_closed_form():
    # analytic ν̃_min = exp(−2r), so LN = 2r
    for r in (0.2, 0.5, 1.3):
        out = log_negativity(two_mode_squeezed(r), 0, 1)
        assert out.log_negativity == pytest.approx(2.0 * r, rel=1e-10)


def test_ln_matches_partial_transpose_oracle(design_config):
    dyn = build_linear_dynamics(design_config)
    traj = evolve(dyn, initial_state(design_config), 3e-6, 1e-8, measure_set="none")
    state = traj.final_state()
    for j, k in ((0, 1), (0, 2), (1, 2)):
        formula = log_negativity(state, j, k).nu_tilde_min
        oracle = pt_nu_tilde_min(state.cov, j, k)
        assert formula == pytest.approx(oracle, abs=1e-8)


def test_ln_oracle_on_random_states(rng):
    for _ in range(1000):
        cov = random_physical_cov(rng, 2)
        state = GaussianState(np.zeros(4), cov)
        formula = log_negativity(state, 0, 1).nu_tilde_min
        assert formula == pytest.approx(pt_nu_tilde_min(cov, 0, 1), abs=1e-8)


def test_ln_symmetric(rng):
    cov = random_physical_cov(rng, 3)
    state = GaussianState(np.zeros(6), cov)
    for j, k in ((0, 1), (0, 2), (1, 2)):
        assert (
            log_negativity(state, j, k).log_negativity
            == log_negativity(state, k, j).log_negativity
        )


def test_ln_rejects_same_mode():
    with pytest.raises(ValueError):
        log_negativity(vacuum(2), 1, 1)


def test_ln_rejects_nonphysical_block():
    # correlations exceed what any state allows: ν̃² comes out negative
    cov = np.block(
        [
            [np.eye(2), np.diag([2.0, 0.5])],
            [np.diag([2.0, 0.5]), np.eye(2)],
        ]
    )
    with pytest.raises(ValueError):
        log_negativity(GaussianState(np.zeros(4), cov), 0, 1)


def test_ln_homotopy_to_product_is_monotone():
    base = two_mode_squeezed(0.8)
    values = []
    for lam in np.linspace(1.0, 0.0, 10):
        cov = base.cov.copy()
        cov[:2, 2:] *= lam
        cov[2:, :2] *= lam
        values.append(log_negativity(GaussianState(np.zeros(4), cov), 0, 1).log_negativity)
    diffs = np.diff(values)
    assert np.all(diffs <= 1e-12)
    assert values[-1] == 0.0


def test_entropy_function_value():
    # 1.1·ln(1.1) − 0.1·ln(0.1), evaluated independently
    direct = 1.1 * np.log(1.1) - 0.1 * np.log(0.1)
    assert entropy_function(1.2) == pytest.approx(direct, rel=1e-14)
    assert entropy_function(1.2) == pytest.approx(0.3351, abs=1e-4)


def test_entropy_function_thermal_identity():
    # g(2n̄+1) equals the Bose-gas entropy (n̄+1)ln(n̄+1) − n̄ ln n̄
    for nbar in (0.1, 0.43, 3.0, 2.05e7):
        expected = (nbar + 1.0) * np.log(nbar + 1.0) - nbar * np.log(nbar)
        assert entropy_function(2.0 * nbar + 1.0) == pytest.approx(expected, rel=1e-12)


def test_entropy_function_stable_near_one():
    for x in (1.0, 1.0 + 1e-15, 1.0 + 1e-13, 1.0 + 1e-12):
        val = entropy_function(x)
        assert np.isfinite(val)
        assert 0.0 <= val <= 1e-10


def test_entropy_vacuum_zero():
    from levicav import von_neumann_entropy

    assert von_neumann_entropy(vacuum(3)) == pytest.approx(0.0, abs=1e-12)


def test_entropy_thermal_additivity():
    from levicav import von_neumann_entropy

    one = von_neumann_entropy(thermal([0.1]))
    two = von_neumann_entropy(thermal([0.1, 0.1]))
    assert one == pytest.approx(entropy_function(1.2), rel=1e-12)
    assert two == pytest.approx(2.0 * one, rel=1e-12)


def test_mutual_information_product_zero():
    report = mutual_information(tensor(thermal([0.3]), thermal([0.9, 0.2])))
    assert report.mutual_information == pytest.approx(0.0, abs=1e-9)


def test_mutual_information_pure_state_symmetry():
    # globally pure: any subsystem entropy equals its complement's
    from levicav import von_neumann_entropy

    state = tensor(two_mode_squeezed(0.6), vacuum(1))
    for cut in ([0], [1], [2], [0, 1], [0, 2]):
        complement = [m for m in range(3) if m not in cut]
        s_cut = von_neumann_entropy(partial_trace(state, cut))
        s_rest = von_neumann_entropy(partial_trace(state, complement))
        assert s_cut == pytest.approx(s_rest, abs=1e-6)


def test_mutual_information_tmsv_doubles_entropy():
    r = 0.6
    report = mutual_information(two_mode_squeezed(r))
    expected = 2.0 * entropy_function(np.cosh(2.0 * r))
    assert report.mutual_information == pytest.approx(expected, rel=1e-9)


def test_mutual_information_group_partition(design_config):
    dyn = build_linear_dynamics(design_config)
    traj = evolve(dyn, initial_state(design_config), 2e-6, 1e-8, measure_set="none")
    state = traj.final_state()
    total = mutual_information(state)
    particles = mutual_information(state, groups=[[1], [2]])
    assert total.mutual_information >= particles.mutual_information >= 0.0
    assert len(total.group_entropies) == 3
    assert len(particles.group_entropies) == 2


def test_mutual_information_rejects_overlap():
    with pytest.raises(ValueError):
        mutual_information(vacuum(3), groups=[[0, 1], [1, 2]])


def test_squeezing_degree_isotropic():
    assert squeezing_degree(thermal([0.1]), 0) == pytest.approx(1.0, abs=1e-12)


def test_squeezing_degree_ratio():
    state = GaussianState(np.zeros(2), np.diag([0.5, 2.0]))
    assert squeezing_degree(state, 0) == pytest.approx(0.25, rel=1e-12)


def test_squeezing_degree_uses_requested_mode():
    state = tensor(thermal([0.1]), GaussianState(np.zeros(2), np.diag([0.5, 2.0])))
    assert squeezing_degree(state, 0) == pytest.approx(1.0, abs=1e-12)
    assert squeezing_degree(state, 1) == pytest.approx(0.25, rel=1e-12)


def test_squeezing_degree_rotation_invariant_extremes(rng):
    # eigenvalue ratio, not axis-aligned variances
    theta = 0.7
    rot = np.array([[np.cos(theta), np.sin(theta)], [-np.sin(theta), np.cos(theta)]])
    cov = rot @ np.diag([0.5, 2.0]) @ rot.T
    state = GaussianState(np.zeros(2), cov)
    assert squeezing_degree(state, 0) == pytest.approx(0.25, rel=1e-10)
