"""Physical constants shared across the engine (CODATA via scipy)."""

from scipy.constants import atomic_mass, c, epsilon_0, hbar
from scipy.constants import k as k_B

# Mean molecular mass of air; used as the default residual-gas species.
AIR_MOLECULE_MASS = 28.97 * atomic_mass

__all__ = ["hbar", "k_B", "epsilon_0", "c", "atomic_mass", "AIR_MOLECULE_MASS"]
