"""Interferometer timelines and their propagation.

A timeline is a list of constant-gradient field segments and instantaneous
momentum kicks. Arm ``i`` feels ``F0 + mu_i * gradient`` during a segment.
Closing halves are the time reverse of the opening half with the gradient
sign flipped, ``B_close(t) = -B_open(T - t)``, which mirrors the relative
momentum profile and closes the loop at zeroth order in K.
"""

from dataclasses import dataclass, field
from enum import Enum

from .model import (
    ArmId,
    ClosureError,
    DegenerateMomentsError,
    PhaseSpacePoint,
    SimulationError,
    arm_force,
)
from .propagator import apply_kick, kick_phase, propagate_segment, segment_phase


class ElementKind(Enum):
    FIELD_SEGMENT = "field_segment"
    KICK = "kick"


@dataclass(frozen=True)
class TimelineElement:
    kind: ElementKind
    duration: float = 0.0
    gradient: float = 0.0
    dp_arm1: float = 0.0
    dp_arm2: float = 0.0

    def __post_init__(self):
        if self.kind is ElementKind.FIELD_SEGMENT and not self.duration >= 0:
            raise SimulationError(f"segment duration must be >= 0, got {self.duration!r}")
        if self.kind is ElementKind.KICK and self.duration != 0:
            raise SimulationError("kicks have zero duration")

    def dp(self, arm):
        return self.dp_arm1 if ArmId(arm) is ArmId.ARM1 else self.dp_arm2


def segment(duration, gradient=0.0):
    return TimelineElement(ElementKind.FIELD_SEGMENT, duration=duration, gradient=gradient)


def kick(dp_arm1=0.0, dp_arm2=0.0):
    return TimelineElement(ElementKind.KICK, dp_arm1=dp_arm1, dp_arm2=dp_arm2)


def reverse_half(elements):
    """Closing half for an opening half: time-reversed, gradients negated."""
    out = []
    for el in reversed(elements):
        if el.kind is ElementKind.KICK:
            out.append(kick(-el.dp_arm1, -el.dp_arm2))
        else:
            out.append(segment(el.duration, -el.gradient))
    return out


@dataclass(frozen=True)
class InterferometerSequence:
    """Complete timeline with its time budget ``T = 2 t_dis + t_free``.

    ``params`` keeps the geometry knobs (t1, t2, t3, b, delta_p, ...) for
    reporting.
    """

    elements: tuple
    t_dis: float
    t_free: float
    total_time: float
    geometry: str = "custom"
    params: dict = field(default_factory=dict, compare=False)

    @property
    def duration(self):
        return sum(el.duration for el in self.elements)


@dataclass(frozen=True)
class ArmTrajectory:
    """Checkpoints ``(time, PhaseSpacePoint)`` at t = 0 and after every element."""

    checkpoints: tuple

    @property
    def final(self):
        return self.checkpoints[-1][1]

    @property
    def end_time(self):
        return self.checkpoints[-1][0]

    @property
    def times(self):
        return [t for t, _ in self.checkpoints]

    def at_element(self, index):
        """State right after element ``index`` (``-1`` gives the initial state)."""
        return self.checkpoints[index + 1]


def propagate_arm(elements, species, env, arm, initial, t0=0.0):
    t = t0
    pt = initial
    checkpoints = [(t, pt)]
    for el in elements:
        if el.kind is ElementKind.KICK:
            dp = el.dp(arm)
            pt = apply_kick(pt, dp)
            pt = PhaseSpacePoint(pt.z, pt.p, pt.phase + kick_phase(pt, dp, env.hbar))
        elif el.duration > 0:
            force = arm_force(species, env, arm, el.gradient)
            dphi = segment_phase(pt, force, env.k_grad, species.mass, el.duration, env.hbar)
            end = propagate_segment(pt, force, env.k_grad, species.mass, el.duration).end
            pt = PhaseSpacePoint(end.z, end.p, pt.phase + dphi)
            t = t + el.duration
        checkpoints.append((t, pt))
    return ArmTrajectory(tuple(checkpoints))


def run(seq, species, env, initial=None):
    """Propagate both arms from the same initial point; returns ``(arm1, arm2)``."""
    if initial is None:
        initial = PhaseSpacePoint()
    elements = seq.elements if isinstance(seq, InterferometerSequence) else seq
    return (
        propagate_arm(elements, species, env, ArmId.ARM1, initial),
        propagate_arm(elements, species, env, ArmId.ARM2, initial),
    )


def close_free_time(species, env, opening):
    """Free-evolution time closing the loop at zeroth order in K.

    Both arms are run through ``opening`` with K = 0. With relative offsets
    ``dz`` and ``dp`` at the end of it, the mirrored closing half adds ``dz``
    again, so the free stage must carry ``-2 dz``: ``T_f = -2 m dz / dp``.
    This is ``2 m |dz| / |dp|`` when the arms are heading back toward each
    other.
    """
    arm1, arm2 = run(opening, species, env.with_k(0.0))
    dz = arm2.final.z - arm1.final.z
    dp = arm2.final.p - arm1.final.p
    if dp == 0:
        raise ClosureError("relative momentum after the opening half is zero; T_f undefined")
    t_free = -2.0 * species.mass * dz / dp
    if not t_free > 0:
        raise ClosureError(
            f"closure needs T_f > 0 but got {t_free:.6g} s (dz={dz:.6g} m, dp={dp:.6g} kg m/s)"
        )
    return t_free


def _check_moments(species):
    if species.mu1 == species.mu2:
        raise DegenerateMomentsError("SG sequences need mu1 != mu2")


def build_sg_butterfly(species, env, delta_p, T, t1=0.0, gradient_override=None):
    """Stern-Gerlach butterfly of total duration ``T``.

    Opening half: ``+hbar_k`` kick on arm 2, then gradient ``+b`` for ``t1``,
    zero for ``t2``, ``-b`` for ``t3``. The impulses obey
    ``b t1 (mu2 - mu1) = delta_p - hbar_k`` and ``b t3 (mu2 - mu1) = 2 delta_p``.
    ``t2`` is solved so the whole timeline lasts ``T`` once ``T_f`` closes it.
    ``t1 = 0`` is the pulse regime, where the two gradient stages become kicks
    ``mu_i * (impulse per unit moment)``.

    ``gradient_override`` replaces ``b`` but keeps ``t1`` and ``t3``; the
    transferred momentum then follows from the overridden ``b``.
    """
    _check_moments(species)
    hbar_k = species.hbar_k
    if not delta_p > 0:
        raise SimulationError(f"delta_p must be positive, got {delta_p!r}")
    if not t1 >= 0:
        raise SimulationError(f"t1 must be >= 0, got {t1!r}")
    # delta_p == hbar_k is allowed only for kicks: the first stage then carries no impulse
    if delta_p < hbar_k or (t1 > 0 and delta_p == hbar_k):
        raise SimulationError(f"delta_p ({delta_p:.6g}) must exceed hbar_k ({hbar_k:.6g})")
    if not T > 0:
        raise SimulationError(f"T must be positive, got {T!r}")
    dmu = species.delta_mu
    m = species.mass

    if t1 == 0:
        if gradient_override is not None:
            raise SimulationError("gradient_override needs a finite t1")
        t3 = 0.0
        b = float("inf")
        imp1 = delta_p - hbar_k
        imp3 = -2.0 * delta_p
        stage1 = kick(species.mu1 * imp1 / dmu, species.mu2 * imp1 / dmu)
        stage3 = kick(species.mu1 * imp3 / dmu, species.mu2 * imp3 / dmu)
    else:
        t3 = 2.0 * delta_p * t1 / (delta_p - hbar_k)
        b = (delta_p - hbar_k) / (dmu * t1) if gradient_override is None else gradient_override
        imp1 = dmu * b * t1
        imp3 = -dmu * b * t3
        stage1 = segment(t1, b)
        stage3 = segment(t3, -b)

    # Relative momentum and displacement (K = 0) as affine functions of t2.
    p_mid = hbar_k + imp1
    p_end = p_mid + imp3
    if p_end == 0:
        raise ClosureError("relative momentum after the opening half is zero; T_f undefined")
    dz_fixed = ((hbar_k + p_mid) / 2 * t1 + (p_mid + p_end) / 2 * t3) / m
    # T_f = -2 m (dz_fixed + p_mid t2 / m) / p_end
    tf_const = -2.0 * m * dz_fixed / p_end
    tf_slope = -2.0 * p_mid / p_end
    t2 = (T - 2 * t1 - 2 * t3 - tf_const) / (2.0 + tf_slope)
    if not t2 >= 0:
        raise SimulationError(
            f"t1 + t3 = {t1 + t3:.6g} s does not fit the displacement budget for T = {T:.6g} s"
        )

    opening = [kick(0.0, hbar_k), stage1, segment(t2, 0.0), stage3]
    t_free = close_free_time(species, env, opening)
    elements = tuple(opening + [segment(t_free, 0.0)] + reverse_half(opening))
    t_dis = t1 + t2 + t3
    params = dict(t1=t1, t2=t2, t3=t3, b=b, delta_p=delta_p, hbar_k=hbar_k)
    return InterferometerSequence(elements, t_dis, t_free, 2 * t_dis + t_free, "sg_butterfly", params)


def build_conventional_butterfly(species, env, T):
    """Laser-pulse butterfly: pi/2 - pi - pi - pi/2 with kicks at 0, T/4, 3T/4, T.

    The pi pulses swap the arms' momenta: arm 2 loses ``hbar_k`` and arm 1
    gains it, then the reverse.
    """
    hk = species.hbar_k
    if not hk > 0:
        raise SimulationError("conventional butterfly needs hbar_k > 0")
    if not T > 0:
        raise SimulationError(f"T must be positive, got {T!r}")
    quarter = T / 4
    elements = (
        kick(0.0, hk),
        segment(quarter),
        kick(hk, -hk),
        segment(T / 2),
        kick(-hk, hk),
        segment(quarter),
        kick(0.0, -hk),
    )
    return InterferometerSequence(
        elements, quarter, T / 2, T, "conventional_butterfly", dict(delta_p=hk, hbar_k=hk)
    )


def build_mach_zehnder(species, env, delta_p, T):
    """pi/2 - pi - pi/2 with kicks at 0, T/2 and T.

    The last kick removes the residual relative momentum on arm 1 so the
    misalignment at T starts at first order in K.
    """
    if not delta_p > 0:
        raise SimulationError(f"delta_p must be positive, got {delta_p!r}")
    if not T > 0:
        raise SimulationError(f"T must be positive, got {T!r}")
    half = T / 2
    elements = (
        kick(0.0, delta_p),
        segment(half),
        kick(delta_p, -delta_p),
        segment(half),
        kick(-delta_p, 0.0),
    )
    return InterferometerSequence(elements, half, 0.0, T, "mach_zehnder", dict(delta_p=delta_p))
