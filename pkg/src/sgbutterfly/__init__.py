"""Stern-Gerlach butterfly, conventional butterfly and Mach-Zehnder atom
interferometers in a linear-plus-quadratic potential."""

from .model import (
    HBAR,
    MU_B,
    ArmId,
    AtomSpecies,
    ClosureError,
    DegenerateMomentsError,
    Environment,
    GaussianEnsemble,
    PhaseSpacePoint,
    Purity,
    SimulationError,
    alpha,
    arm_force,
)
from .propagator import (
    apply_kick,
    harmonic_basis,
    kick_phase,
    oracle_integrate,
    propagate_segment,
    segment_phase,
)
from .sequences import (
    build_conventional_butterfly,
    build_mach_zehnder,
    build_sg_butterfly,
    close_free_time,
    run,
)
from .observables import (
    formula_conventional,
    formula_hbark_zero,
    formula_misalignment,
    formula_pulse_regime,
    gradient_phase,
    misalignment,
    phase_difference,
    populations,
    visibility,
)

__version__ = "0.1.0"
