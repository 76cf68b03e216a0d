"""Exact propagation through one constant-force interval of the quadratic potential.

Inside an interval the equations of motion are ``dz/dt = p/m`` and
``dp/dt = F + K z`` with constant linear force ``F``. With ``u = (K/m) dt**2``
the solution is written through the Stumpff-like series

    c0(u) = sum u**n / (2n)!       -> cosh(w dt), cos(w dt) or 1
    c1(u) = sum u**n / (2n+1)!     -> sinh(w dt) / (w dt)
    c2(u) = sum u**n / (2n+2)!     -> (cosh(w dt) - 1) / (w dt)**2
    c3(u) = sum u**n / (2n+3)!     -> (sinh(w dt) - w dt) / (w dt)**3

so K > 0, K < 0 and K = 0 share one code path and the w -> 0 limit is smooth.
"""

from dataclasses import dataclass
import math

import numpy as np

from .model import PhaseSpacePoint, SimulationError

# Below this |u| all four functions come from the power series. The series is
# exact to rounding there and avoids the cancellation in c2 and c3.
SERIES_SWITCH = 1.0
_N_TERMS = 18


def _series(u, k):
    # Horner evaluation of sum_n u**n / (2n+k)!
    acc = 1.0
    for n in range(_N_TERMS, 0, -1):
        acc = 1.0 + acc * u / ((2 * n + k) * (2 * n + k - 1))
    return acc / math.factorial(k)


def _stumpff_scalar(u):
    if abs(u) < SERIES_SWITCH:
        return tuple(float(_series(u, k)) for k in range(4))
    x = math.sqrt(abs(u))
    sh, c0 = (math.sinh, math.cosh(x)) if u > 0 else (math.sin, math.cos(x))
    c1 = sh(x) / x
    c1h = sh(0.5 * x) / (0.5 * x)
    return c0, c1, 0.5 * c1h * c1h, (c1 - 1.0) / u


def stumpff(u):
    """Return ``(c0, c1, c2, c3)`` evaluated at ``u`` (scalar or array)."""
    if isinstance(u, (float, int, np.floating)):
        return _stumpff_scalar(float(u))
    u = np.asarray(u, dtype=float)
    small = np.abs(u) < SERIES_SWITCH
    with np.errstate(invalid="ignore", divide="ignore"):
        x = np.sqrt(np.abs(u))
        pos = u > 0
        c0 = np.where(pos, np.cosh(x), np.cos(x))
        c1 = np.where(pos, np.sinh(x), np.sin(x)) / x
        xh = 0.5 * x
        c1h = np.where(pos, np.sinh(xh), np.sin(xh)) / xh
        c2 = 0.5 * c1h**2
        c3 = (c1 - 1.0) / u
    out = []
    for k, closed in enumerate((c0, c1, c2, c3)):
        if np.any(small):
            closed = np.where(small, _series(np.where(small, u, 0.0), k), closed)
        out.append(closed[()] if closed.ndim == 0 else closed)
    return tuple(out)


@dataclass(frozen=True)
class HarmonicBasis:
    """Generalized cosine and sine for one interval, plus their integrals.

    ``c`` is cosh/cos/1 and ``s_over_omega`` is sinh(w t)/w, sin(w t)/w or t.
    ``q = int_0^t s_over_omega`` and ``r = int_0^t q`` are what the position
    and phase integrals need.
    """

    c: float
    s_over_omega: float
    omega_sq_signed: float
    q: float
    r: float


def harmonic_basis(k_grad, mass, dt):
    if not np.all(np.asarray(mass) > 0):
        raise SimulationError("mass must be positive")
    w2 = k_grad / mass
    c0, c1, c2, c3 = stumpff(w2 * dt * dt)
    return HarmonicBasis(c0, dt * c1, w2, dt * dt * c2, dt * dt * dt * c3)


def evolve_relative(dz, dp, k_grad, mass, dt):
    """Free evolution of a displacement (dz, dp) under K alone."""
    b = harmonic_basis(k_grad, mass, dt)
    return dz * b.c + dp / mass * b.s_over_omega, dp * b.c + k_grad * dz * b.s_over_omega


@dataclass(frozen=True)
class SegmentResult:
    end: PhaseSpacePoint
    jacobian: np.ndarray


def propagate_segment(start, force, k_grad, mass, dt):
    """Advance (z, p) through ``dt`` under constant ``force``; phase is carried unchanged.

    Negative ``dt`` runs the motion backwards.
    """
    b = harmonic_basis(k_grad, mass, dt)
    z = start.z * b.c + start.p / mass * b.s_over_omega + force / mass * b.q
    p = start.p * b.c + (force + k_grad * start.z) * b.s_over_omega
    jac = np.array([[b.c, b.s_over_omega / mass], [k_grad * b.s_over_omega, b.c]])
    return SegmentResult(PhaseSpacePoint(z, p, start.phase), jac)


def segment_phase(start, force, k_grad, mass, dt, hbar):
    """Phase ``force / (2 hbar) * int_0^dt z(tau) dtau`` along the segment."""
    if np.any(np.asarray(dt) < 0):
        raise SimulationError("segment_phase needs dt >= 0")
    b = harmonic_basis(k_grad, mass, dt)
    z_int = start.z * b.s_over_omega + start.p / mass * b.q + force / mass * b.r
    return force * z_int / (2.0 * hbar)


def apply_kick(start, dp):
    return PhaseSpacePoint(start.z, start.p + dp, start.phase)


def kick_phase(start, dp, hbar):
    """Phase ``dp * z / (2 hbar)`` picked up by an instantaneous kick at ``z``.

    It is the zero-duration limit of ``F / (2 hbar) * int z dtau`` for an
    impulse ``dp = F * dt``, and equals the BCH phase of
    ``D(0, dp) D(z, p) = exp(i dp z / 2 hbar) D(z, p + dp)``.
    """
    return dp * start.z / (2.0 * hbar)


MIN_ORACLE_STEPS = 100


def _rk4_simpson(z, p, force, k_grad, mass, t0, dt, steps, hbar):
    h = dt / steps
    t = t0
    f = force(t)
    integrand = [z * f]
    acc = 0.0
    for i in range(steps):
        fm = force(t + 0.5 * h)
        fe = force(t + h)
        k1z, k1p = p / mass, f + k_grad * z
        z2, p2 = z + 0.5 * h * k1z, p + 0.5 * h * k1p
        k2z, k2p = p2 / mass, fm + k_grad * z2
        z3, p3 = z + 0.5 * h * k2z, p + 0.5 * h * k2p
        k3z, k3p = p3 / mass, fm + k_grad * z3
        z4, p4 = z + h * k3z, p + h * k3p
        k4z, k4p = p4 / mass, fe + k_grad * z4
        z = z + h / 6.0 * (k1z + 2 * k2z + 2 * k3z + k4z)
        p = p + h / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p)
        t = t0 + (i + 1) * h
        f = fe
        # composite Simpson weights 1, 4, 2, 4, ..., 4, 1
        w = 1.0 if i + 1 == steps else (4.0 if (i + 1) % 2 else 2.0)
        acc = acc + w * z * f
    acc = acc + integrand[0]
    phase = h / 3.0 * acc / (2.0 * hbar)
    return z, p, phase


def oracle_integrate(start, force, k_grad, mass, t_span, hbar, steps=10_000, t0=0.0):
    """Numerical reference: fixed-step RK4 with Simpson phase, Richardson-extrapolated.

    ``force`` is a callable of time. The run is done with ``steps`` and
    ``2 * steps`` steps and combined as ``(16 y_fine - y_coarse) / 15``.
    All inputs broadcast, so a batch of segments can be integrated at once.
    A negative ``t_span`` integrates backwards; the phase is then the
    signed integral.
    """
    if steps < MIN_ORACLE_STEPS:
        raise SimulationError(f"oracle needs at least {MIN_ORACLE_STEPS} steps, got {steps}")
    steps += steps % 2
    z0 = np.asarray(start.z, dtype=float)
    p0 = np.asarray(start.p, dtype=float)
    coarse = _rk4_simpson(z0, p0, force, k_grad, mass, t0, t_span, steps, hbar)
    fine = _rk4_simpson(z0, p0, force, k_grad, mass, t0, t_span, 2 * steps, hbar)
    z, p, phase = ((16.0 * a - b) / 15.0 for a, b in zip(fine, coarse))
    return PhaseSpacePoint(z[()], p[()], (np.asarray(start.phase) + phase)[()])
