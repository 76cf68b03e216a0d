"""Physical quantities shared by the interferometer simulation.

Everything is SI. The atom moves along z (positive upward) in the potential
``V(z) = -F0 z - K z**2 / 2``, so ``F0 = -m g`` and ``K = m * Gamma`` describe
gravity with a gravity gradient ``Gamma``. ``K > 0`` is the repulsive case
(cosh/sinh motion), ``K < 0`` a trap (cos/sin motion).
"""

from dataclasses import dataclass
from enum import Enum
import math

import numpy as np

HBAR = 1.054571817e-34  # J s
MU_B = 9.2740100783e-24  # J/T
G_EARTH = 9.8  # m/s^2, value used in the gravity presets


class SimulationError(ValueError):
    """Base class for invalid physical input."""


class DegenerateMomentsError(SimulationError):
    """Raised when mu1 == mu2, so no differential force can split the arms."""


class ClosureError(SimulationError):
    """Raised when a geometry cannot be closed at zeroth order in K."""


class ArmId(Enum):
    ARM1 = 1
    ARM2 = 2


class Purity(Enum):
    PURE = "pure"
    MIXED = "mixed"


@dataclass(frozen=True)
class AtomSpecies:
    """Atom with two internal states carrying magnetic moments mu1 and mu2.

    ``hbar_k`` is the momentum kick of the splitting pi/2 pulse given to the
    state-2 arm; it may be zero (radio-frequency transitions).
    """

    mass: float
    mu1: float
    mu2: float
    hbar_k: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.mass) and self.mass > 0):
            raise SimulationError(f"mass must be positive, got {self.mass!r}")
        if not (math.isfinite(self.mu1) and math.isfinite(self.mu2)):
            raise SimulationError("magnetic moments must be finite")
        if not (math.isfinite(self.hbar_k) and self.hbar_k >= 0):
            raise SimulationError(f"hbar_k must be >= 0, got {self.hbar_k!r}")

    @classmethod
    def from_lande(cls, mass, g_f1, m_f1, g_f2, m_f2, hbar_k=0.0):
        """Build moments as mu_B * g_F * m_F for each state."""
        return cls(mass, MU_B * g_f1 * m_f1, MU_B * g_f2 * m_f2, hbar_k)

    def moment(self, arm):
        return self.mu1 if ArmId(arm) is ArmId.ARM1 else self.mu2

    @property
    def delta_mu(self):
        return self.mu2 - self.mu1


@dataclass(frozen=True)
class Environment:
    """Uniform force ``f0`` (N) and signed gradient strength ``k_grad`` (N/m)."""

    f0: float = 0.0
    k_grad: float = 0.0
    hbar: float = HBAR

    def __post_init__(self):
        if not (math.isfinite(self.f0) and math.isfinite(self.k_grad)):
            raise SimulationError("f0 and k_grad must be finite")
        if not (math.isfinite(self.hbar) and self.hbar > 0):
            raise SimulationError("hbar must be positive")

    @classmethod
    def gravity(cls, mass, g=G_EARTH, gamma=0.0, hbar=HBAR):
        """Gravity with F0 = -m g and K = m * gamma."""
        return cls(f0=-mass * g, k_grad=mass * gamma, hbar=hbar)

    def omega(self, mass):
        return math.sqrt(abs(self.k_grad) / mass)

    def with_k(self, k_grad):
        return Environment(self.f0, k_grad, self.hbar)


@dataclass(frozen=True)
class PhaseSpacePoint:
    """Position, momentum and accumulated action phase of one arm.

    Fields may also hold equal-shape numpy arrays for batched evaluation.
    """

    z: float = 0.0
    p: float = 0.0
    phase: float = 0.0

    def __post_init__(self):
        for name in ("z", "p", "phase"):
            v = getattr(self, name)
            ok = math.isfinite(v) if isinstance(v, float) else np.all(np.isfinite(v))
            if not ok:
                raise SimulationError(f"{name} must be finite")


@dataclass(frozen=True)
class GaussianEnsemble:
    """Uncorrelated Gaussian cloud with position and momentum spreads."""

    sigma_z: float
    sigma_p: float
    purity: Purity = Purity.MIXED
    hbar: float = HBAR

    def __post_init__(self):
        object.__setattr__(self, "purity", Purity(self.purity))
        if not (self.sigma_z > 0 and self.sigma_p > 0):
            raise SimulationError("sigma_z and sigma_p must be positive")
        # small slack so sigma_p = hbar / (2 sigma_z) is accepted after rounding
        if self.purity is Purity.PURE and self.sigma_z * self.sigma_p < self.hbar / 2 * (1 - 1e-12):
            raise SimulationError("pure Gaussian state violates sigma_z * sigma_p >= hbar/2")


def alpha(mu1, mu2):
    """Prefactor (mu1 + mu2) / (mu2 - mu1) of the moment-dependent T**3 phase."""
    if mu1 == mu2:
        raise DegenerateMomentsError("alpha is undefined for mu1 == mu2")
    return (mu1 + mu2) / (mu2 - mu1)


def arm_force(species, env, arm, gradient):
    """Linear force F0 + mu_arm * dB/dz on the given arm."""
    return env.f0 + species.moment(arm) * gradient


# Named parameter sets. Masses follow the figure captions (1.42e-25 kg).
RB_MASS = 1.42e-25
SPECIES_PRESETS = {
    # 87Rb 5S1/2 F=2 (g_F = 1/2), m_F = 1 and 2
    "rb87-f2": AtomSpecies.from_lande(RB_MASS, 0.5, 1, 0.5, 2),
    # circular Rydberg |55c>, |56c>, moments proportional to 54 and 55
    "rydberg-55c-56c": AtomSpecies(RB_MASS, 54 * MU_B, 55 * MU_B),
    # antisymmetric moments, alpha = 0
    "symmetric": AtomSpecies.from_lande(RB_MASS, 0.5, -1, 0.5, 1),
}

FIG3_GAMMA = 3e-6  # s^-2
FIG3_DELTA_V = 0.02  # m/s
FIG5_SIGMA_Z = 200e-6  # m
FIG5_SIGMA_V = 0.44e-3  # m/s


def get_species(name, hbar_k=None):
    try:
        species = SPECIES_PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown species preset {name!r}; known: {sorted(SPECIES_PRESETS)}") from None
    if hbar_k is not None:
        species = AtomSpecies(species.mass, species.mu1, species.mu2, hbar_k)
    return species


def fig3_default():
    """Species, environment and delta_p used for the phase figures."""
    species = SPECIES_PRESETS["rb87-f2"]
    env = Environment.gravity(species.mass, G_EARTH, FIG3_GAMMA)
    return species, env, species.mass * FIG3_DELTA_V


def fig5_default():
    """Species, environment, delta_p and ensemble used for the visibility figure."""
    species, env, delta_p = fig3_default()
    ens = GaussianEnsemble(FIG5_SIGMA_Z, species.mass * FIG5_SIGMA_V, Purity.MIXED)
    return species, env, delta_p, ens
