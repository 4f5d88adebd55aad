"""
Multimode Gaussian states in dimensionless quadratures.

The state vector is ordered (Q, P, x_1, p_1, x_2, p_2, ...) with the cavity
mode first. Quadratures follow x = b† + b, p = i(b† − b), so the vacuum
covariance is the identity and [X_j, X_k] = 2i Ω_jk with Ω the block-diagonal
symplectic form built from [[0, 1], [-1, 0]].
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

# Static physicality slack: symplectic eigenvalues may undershoot 1 by this
# much before a state is rejected. Propagation code passes a looser slack to
# absorb exponential-map rounding.
PHYSICALITY_SLACK = 1e-9
SYMMETRY_TOL = 1e-10

# Adjacent moduli of eig(iΩV) must agree to this tolerance when pairing ±ν.
PAIRING_TOL = 1e-8


def symplectic_form(num_modes: int) -> NDArray[np.float64]:
    """Return the 2M×2M symplectic form Ω = ⊕ [[0, 1], [-1, 0]]."""
    if num_modes < 1:
        raise ValueError("mode count must be positive")
    omega = np.zeros((2 * num_modes, 2 * num_modes))
    for j in range(num_modes):
        omega[2 * j, 2 * j + 1] = 1.0
        omega[2 * j + 1, 2 * j] = -1.0
    return omega


@dataclass(frozen=True)
class GaussianState:
    """
    Mean vector and covariance matrix of a Gaussian state.

    Attributes
    ----------
    mean:
        Length-2M vector of quadrature expectations.
    cov:
        2M×2M symmetric covariance matrix, V_ij = ½⟨{X_i, X_j}⟩.
    """

    mean: NDArray[np.float64]
    cov: NDArray[np.float64]

    def __post_init__(self) -> None:
        mean = np.asarray(self.mean, dtype=float)
        cov = np.asarray(self.cov, dtype=float)
        if mean.ndim != 1 or cov.ndim != 2:
            raise ValueError("mean must be a vector and cov a matrix")
        size = mean.shape[0]
        if size == 0 or size % 2 != 0 or cov.shape != (size, size):
            raise ValueError(f"inconsistent dimensions: mean {mean.shape}, cov {cov.shape}")
        if np.max(np.abs(cov - cov.T)) > SYMMETRY_TOL:
            raise ValueError("covariance matrix is not symmetric")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def num_modes(self) -> int:
        return self.mean.shape[0] // 2

    def require_physical(self, slack: float = PHYSICALITY_SLACK) -> None:
        """Raise if any symplectic eigenvalue falls below 1 − slack."""
        nu = symplectic_eigenvalues(self)
        nu_min = float(nu[0])
        if nu_min < 1.0 - slack:
            raise ValueError(f"non-physical state: min symplectic eigenvalue {nu_min:.6e}")

    def is_physical(self, slack: float = PHYSICALITY_SLACK) -> bool:
        try:
            self.require_physical(slack)
        except ValueError:
            return False
        return True

    def to_json_dict(self) -> dict:
        """Interchange form: {"modes": M, "mean": [...], "cov": [[...]]}, row-major."""
        return {
            "modes": self.num_modes,
            "mean": self.mean.tolist(),
            "cov": self.cov.tolist(),
        }

    @staticmethod
    def from_json_dict(payload: dict) -> "GaussianState":
        state = GaussianState(
            mean=np.asarray(payload["mean"], dtype=float),
            cov=np.asarray(payload["cov"], dtype=float),
        )
        if state.num_modes != int(payload["modes"]):
            raise ValueError("mode count disagrees with vector dimensions")
        return state


def vacuum(num_modes: int) -> GaussianState:
    """Vacuum state of M modes: zero mean, identity covariance."""
    if num_modes < 1:
        raise ValueError("mode count must be positive")
    return GaussianState(mean=np.zeros(2 * num_modes), cov=np.eye(2 * num_modes))


def thermal(occupations: Sequence[float]) -> GaussianState:
    """Thermal product state with covariance diag(2n̄_j + 1) per mode."""
    occ = np.asarray(occupations, dtype=float)
    if occ.ndim != 1 or occ.size == 0:
        raise ValueError("occupations must be a nonempty sequence")
    if np.any(occ < 0):
        raise ValueError("occupations must be nonnegative")
    diag = np.repeat(2.0 * occ + 1.0, 2)
    return GaussianState(mean=np.zeros(occ.size * 2), cov=np.diag(diag))


def tensor(a: GaussianState, b: GaussianState) -> GaussianState:
    """Tensor product: modes of `a` precede modes of `b`."""
    na, nb = a.mean.shape[0], b.mean.shape[0]
    cov = np.zeros((na + nb, na + nb))
    cov[:na, :na] = a.cov
    cov[na:, na:] = b.cov
    return GaussianState(mean=np.concatenate([a.mean, b.mean]), cov=cov)


def _quadrature_indices(modes: Sequence[int]) -> NDArray[np.intp]:
    idx = []
    for m in modes:
        idx.extend((2 * m, 2 * m + 1))
    return np.asarray(idx, dtype=np.intp)


def partial_trace(state: GaussianState, keep: Sequence[int]) -> GaussianState:
    """
    Reduce to the listed modes, in the requested order.

    For Gaussian states the reduced state is just the corresponding rows and
    columns of the mean and covariance.
    """
    keep = list(keep)
    if not keep:
        raise ValueError("must keep at least one mode")
    if len(set(keep)) != len(keep):
        raise ValueError("mode indices must be distinct")
    if min(keep) < 0 or max(keep) >= state.num_modes:
        raise ValueError("mode index out of range")
    idx = _quadrature_indices(keep)
    return GaussianState(mean=state.mean[idx], cov=state.cov[np.ix_(idx, idx)])


def symplectic_spectrum_of_cov(cov: NDArray[np.float64]) -> NDArray[np.float64]:
    """
    Symplectic eigenvalues of a covariance matrix: the M paired moduli of
    eig(iΩV), ascending. Raises if the ±ν pairing is inconsistent.
    """
    cov = np.asarray(cov, dtype=float)
    size = cov.shape[0]
    if cov.shape != (size, size) or size % 2 != 0:
        raise ValueError("covariance must be square with even dimension")
    if np.max(np.abs(cov - cov.T)) > SYMMETRY_TOL:
        raise ValueError("covariance matrix is not symmetric")
    omega = symplectic_form(size // 2)
    moduli = np.sort(np.abs(np.linalg.eigvals(1j * omega @ cov)))
    pair_gap = np.max(np.abs(moduli[0::2] - moduli[1::2]))
    if pair_gap > PAIRING_TOL * max(1.0, float(moduli[-1])):
        raise ValueError(f"symplectic pairing failed: gap {pair_gap:.3e}")
    return moduli[0::2]


def symplectic_eigenvalues(state: GaussianState) -> NDArray[np.float64]:
    """Symplectic eigenvalues of the state's covariance, ascending."""
    return symplectic_spectrum_of_cov(state.cov)


def purity(state: GaussianState) -> float:
    """Purity of a Gaussian state, 1/∏ν_k."""
    return float(1.0 / np.prod(symplectic_eigenvalues(state)))


def wigner(
    state: GaussianState,
    x_grid: NDArray[np.float64],
    p_grid: NDArray[np.float64],
) -> NDArray[np.float64]:
    """
    Wigner density of a single-mode state on a rectangular (x, p) lattice.

    Returns W[i, j] evaluated at (x_grid[i], p_grid[j]) with
    W(r) = exp(−½ (r−μ)ᵀ V⁻¹ (r−μ)) / (2π √det V).
    """
    if state.num_modes != 1:
        raise ValueError("Wigner evaluation expects a single-mode state")
    det = float(np.linalg.det(state.cov))
    if det < 1e-30:
        raise ValueError("covariance is numerically singular")
    inv = np.linalg.inv(state.cov)
    dx = np.asarray(x_grid, dtype=float)[:, None] - state.mean[0]
    dp = np.asarray(p_grid, dtype=float)[None, :] - state.mean[1]
    quad = inv[0, 0] * dx**2 + 2.0 * inv[0, 1] * dx * dp + inv[1, 1] * dp**2
    return np.exp(-0.5 * quad) / (2.0 * np.pi * np.sqrt(det))
