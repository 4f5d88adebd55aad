"""
Informational measures on Gaussian states.

Logarithmic negativity between two modes, von Neumann entropy, mutual
information over mode groups, and the single-mode squeezing degree. All
logarithms are natural.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .gaussian import GaussianState, partial_trace, symplectic_eigenvalues

# LN above this counts as genuine entanglement rather than numerical zero.
LN_POSITIVE_THRESHOLD = 1e-6

# Discriminants and 1 − ν̃ may dip negative by eigen-solver noise; anything
# within this slack is clamped, anything beyond is rejected as non-physical.
_DISCRIMINANT_SLACK = 1e-9


@dataclass(frozen=True)
class BipartitionMeasure:
    """Logarithmic negativity between one pair of modes."""

    mode_pair: tuple[int, int]
    nu_tilde_min: float
    log_negativity: float


@dataclass(frozen=True)
class EntropyReport:
    """Entropies of mode groups plus the resulting mutual information."""

    group_entropies: tuple[float, ...]
    total_entropy: float
    mutual_information: float


def entropy_function(x: float) -> float:
    """g(x) = ((x+1)/2)·ln((x+1)/2) − ((x−1)/2)·ln((x−1)/2), with g(1) = 0."""
    x = max(float(x), 1.0)
    up = 0.5 * (x + 1.0)
    down = 0.5 * (x - 1.0)
    if down <= 0.0:
        return 0.0
    return up * math.log(up) - down * math.log(down)


def _det2(m00: float, m01: float, m10: float, m11: float) -> float:
    return m00 * m11 - m01 * m10


def pair_log_negativity_cov(cov: np.ndarray, j: int, k: int) -> tuple[float, float]:
    """
    (ν̃_min, LN) for modes (j, k) of a covariance matrix, determinant form:
    σ = det A + det B − 2 det C, ν̃_min = sqrt(σ/2 − sqrt(σ² − 4 det V)/2),
    LN = max(0, −ln ν̃_min). This is the shipping route; the eigenvalue route
    through the partial transpose lives in the test oracles.
    """
    xj, pj, xk, pk = 2 * j, 2 * j + 1, 2 * k, 2 * k + 1
    a = _det2(cov[xj, xj], cov[xj, pj], cov[pj, xj], cov[pj, pj])
    b = _det2(cov[xk, xk], cov[xk, pk], cov[pk, xk], cov[pk, pk])
    c = _det2(cov[xj, xk], cov[xj, pk], cov[pj, xk], cov[pj, pk])
    idx = (xj, pj, xk, pk)
    det_v = float(np.linalg.det(cov[np.ix_(idx, idx)]))
    sigma = a + b - 2.0 * c
    disc = sigma * sigma - 4.0 * det_v
    if disc < -_DISCRIMINANT_SLACK:
        raise ValueError(f"non-physical two-mode block: discriminant {disc:.3e}")
    nu_sq = 0.5 * (sigma - math.sqrt(max(disc, 0.0)))
    if nu_sq < -_DISCRIMINANT_SLACK:
        raise ValueError(f"non-physical two-mode block: ν̃² = {nu_sq:.3e}")
    nu_tilde = math.sqrt(max(nu_sq, 0.0))
    ln_value = max(0.0, -math.log(nu_tilde)) if nu_tilde > 0.0 else math.inf
    return nu_tilde, ln_value


def log_negativity(state: GaussianState, j: int, k: int) -> BipartitionMeasure:
    """Logarithmic negativity of the (j, k) mode pair of a state."""
    if j == k:
        raise ValueError("log negativity needs two distinct modes")
    if min(j, k) < 0 or max(j, k) >= state.num_modes:
        raise ValueError("mode index out of range")
    nu_tilde, ln_value = pair_log_negativity_cov(state.cov, j, k)
    return BipartitionMeasure(mode_pair=(j, k), nu_tilde_min=nu_tilde, log_negativity=ln_value)


def single_mode_entropy_cov(cov: np.ndarray, mode: int) -> float:
    """Entropy of one mode: its symplectic eigenvalue is sqrt(det V_mode)."""
    x, p = 2 * mode, 2 * mode + 1
    det = _det2(cov[x, x], cov[x, p], cov[p, x], cov[p, p])
    return entropy_function(math.sqrt(max(det, 1.0)))


def squeezing_degree_cov(cov: np.ndarray, mode: int) -> float:
    """η of one mode from the closed-form 2×2 eigenvalues of its block."""
    x, p = 2 * mode, 2 * mode + 1
    half_trace = 0.5 * (cov[x, x] + cov[p, p])
    radius = math.hypot(0.5 * (cov[x, x] - cov[p, p]), cov[x, p])
    return (half_trace - radius) / (half_trace + radius)


def von_neumann_entropy(state: GaussianState) -> float:
    """Entropy S = Σ_k g(ν_k) over the symplectic spectrum."""
    return float(sum(entropy_function(nu) for nu in symplectic_eigenvalues(state)))


def mutual_information(
    state: GaussianState,
    groups: Sequence[Sequence[int]] | None = None,
) -> EntropyReport:
    """
    Mutual information 𝓘 = Σ_g S(group g) − S(union of groups).

    The default partition is every mode as its own group, covering all modes.
    A particles-only variant passes the mechanical mode indices as singletons.
    """
    if groups is None:
        groups = [[m] for m in range(state.num_modes)]
    flat: list[int] = []
    for group in groups:
        flat.extend(group)
    if len(set(flat)) != len(flat):
        raise ValueError("mode groups must be disjoint")
    group_entropies = tuple(von_neumann_entropy(partial_trace(state, g)) for g in groups)
    union = partial_trace(state, flat)
    total = von_neumann_entropy(union)
    return EntropyReport(
        group_entropies=group_entropies,
        total_entropy=total,
        mutual_information=float(sum(group_entropies) - total),
    )


def squeezing_degree(state: GaussianState, mode: int) -> float:
    """
    Squeezing degree η of one mode: smallest over largest eigenvalue of its
    2×2 covariance block. η ≤ 1 always; squeezing is inferred when the minor
    variance additionally drops below 1.
    """
    if not 0 <= mode < state.num_modes:
        raise ValueError("mode index out of range")
    return float(squeezing_degree_cov(state.cov, mode))
