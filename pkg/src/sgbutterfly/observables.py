"""Phase differences, misalignment, visibility and detection probabilities.

The ``formula_*`` functions are the closed-form first-order-in-K references;
everything else works on simulated trajectories.
"""

from dataclasses import dataclass
import math

import numpy as np

from .model import PhaseSpacePoint, Purity, SimulationError, alpha
from .propagator import evolve_relative
from .sequences import run


class TrajectoryMismatchError(SimulationError):
    """Raised when two arm trajectories do not end at the same time."""


def _check_coterminal(arm1, arm2):
    t1, t2 = arm1.end_time, arm2.end_time
    if abs(t1 - t2) > 1e-12 * max(abs(t1), abs(t2), 1.0):
        raise TrajectoryMismatchError(f"arms end at different times ({t1!r} vs {t2!r})")


def phase_difference(arm1, arm2, hbar):
    """Phi_2(T) - Phi_1(T) + (z1 p2 - z2 p1) / (2 hbar)."""
    _check_coterminal(arm1, arm2)
    a, b = arm1.final, arm2.final
    return b.phase - a.phase + (a.z * b.p - b.z * a.p) / (2.0 * hbar)


@dataclass(frozen=True)
class PhaseResult:
    total: float
    gradient_part: float
    k_independent_part: float


def gradient_phase(seq, species, env, initial=None):
    """Split the phase difference into the K-driven part and the K = 0 part.

    The sequence is run at the given K and again with K = 0 from the same
    initial state.
    """
    if initial is None:
        initial = PhaseSpacePoint()
    total = phase_difference(*run(seq, species, env, initial), env.hbar)
    base = phase_difference(*run(seq, species, env.with_k(0.0), initial), env.hbar)
    return PhaseResult(total=total, gradient_part=total - base, k_independent_part=base)


def formula_conventional(env, species, p0, T):
    """Laser-pulse butterfly phase, first order in K."""
    m, hk = species.mass, species.hbar_k
    k = hk / env.hbar
    return -(env.k_grad * T**2 * k / (32 * m)) * (p0 * T / m + hk * T / (2 * m) + env.f0 * T**2 / (2 * m))


def formula_pulse_regime(env, species, p0, delta_p, T):
    """SG butterfly phase with instantaneous gradient pulses, first order in K."""
    a = alpha(species.mu1, species.mu2)
    hk = species.hbar_k
    m = species.mass
    # (delta_p / hbar_k) * formula_conventional with the hbar_k cancelled out
    first = -(env.k_grad * T**2 * delta_p / (32 * m * env.hbar)) * (
        p0 * T / m + hk * T / (2 * m) + env.f0 * T**2 / (2 * m)
    )
    second = a * env.k_grad * T**3 * delta_p * (delta_p / 3 + hk / 2) / (32 * m**2 * env.hbar)
    return first + second


def formula_hbark_zero(env, species, p0, delta_p, T):
    """SG butterfly phase for negligible photon recoil, first order in K."""
    a = alpha(species.mu1, species.mu2)
    m = species.mass
    dv = delta_p / m
    return -(env.k_grad * T**2 / (32 * env.hbar)) * dv * (p0 * T / m + env.f0 * T**2 / (2 * m) - dv * a * T / 3)


def position_phase_term(env, species, p0, delta_p, T):
    """Magnitude of the part of the hbar_k -> 0 phase set by the start/end displacement."""
    m = species.mass
    return abs(env.k_grad * T**2 / (32 * env.hbar) * delta_p / m * (p0 * T / m + env.f0 * T**2 / (2 * m)))


def moment_phase_term(env, species, delta_p, T):
    """Magnitude of the magnetic-moment-dependent T**3 phase."""
    a = alpha(species.mu1, species.mu2)
    m = species.mass
    return abs(env.k_grad * T**3 / (32 * env.hbar) * (delta_p / m) ** 2 * a / 3)


@dataclass(frozen=True)
class Misalignment:
    dz: float
    dp: float
    dz_evolved: float
    dp_evolved: float


def evolve_misalignment(dz, dp, env, mass, T):
    """Map (dz, dp) through the K-only evolution over T.

    For K > 0 this is ``dz cosh(wT) - dp sinh(wT)/(m w)``,
    ``dp cosh(wT) + m w dz sinh(wT)``, i.e. the inverse of the forward flow.
    """
    return evolve_relative(dz, dp, env.k_grad, mass, -T)


def misalignment(arm1, arm2, env, species):
    _check_coterminal(arm1, arm2)
    a, b = arm1.final, arm2.final
    dz = b.z - a.z
    dp = b.p - a.p
    dz_e, dp_e = evolve_misalignment(dz, dp, env, species.mass, arm1.end_time)
    return Misalignment(dz, dp, float(dz_e), float(dp_e))


def formula_misalignment(kind, env, species, delta_p, T):
    """First-order (dz, dp) at T for 'butterfly' or 'mach_zehnder'."""
    m, K = species.mass, env.k_grad
    if kind == "butterfly":
        return K * T**3 * delta_p / (32 * m**2), 0.0
    if kind == "mach_zehnder":
        return K * T**3 * delta_p / (8 * m**2), K * T**2 * delta_p / (4 * m)
    raise ValueError(f"unknown geometry {kind!r}")


def visibility(mis, ens, hbar=None):
    """Contrast of the displaced Gaussian overlap, pure or mixed."""
    hbar = ens.hbar if hbar is None else hbar
    dz, dp = mis.dz_evolved, mis.dp_evolved
    if Purity(ens.purity) is Purity.PURE:
        expo = dz**2 / (8 * ens.sigma_z**2) + dp**2 / (8 * ens.sigma_p**2)
    else:
        expo = (ens.sigma_z**2 * dp**2 + ens.sigma_p**2 * dz**2) / (2 * hbar**2)
    return math.exp(-expo)


def populations(C, delta_phi):
    """Detection probabilities (P1, P2) = ((1 + C cos dphi)/2, (1 - C cos dphi)/2)."""
    if not 0.0 <= C <= 1.0:
        raise SimulationError(f"contrast must lie in [0, 1], got {C!r}")
    x = C * np.cos(delta_phi)
    p1 = 0.5 * (1.0 + x)
    return p1, 1.0 - p1
