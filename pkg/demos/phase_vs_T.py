"""
Gradient phase of the SG butterfly vs interrogation time
========================================================

Drop the atoms from rest, or launch them so they come back to the start
height, and compare the simulated K-driven phase with the closed form.
"""

import numpy as np

from sgbutterfly import model
from sgbutterfly.model import PhaseSpacePoint
from sgbutterfly.observables import formula_hbark_zero, gradient_phase, moment_phase_term
from sgbutterfly.sequences import build_sg_butterfly

# gravity, K/m = 3e-6 s^-2, delta_v = 0.02 m/s
_, env, dp = model.fig3_default()

for name in ("symmetric", "rb87-f2", "rydberg-55c-56c"):
    sp = model.SPECIES_PRESETS[name]
    print(f"\n{name}: alpha = {model.alpha(sp.mu1, sp.mu2):.6g}")
    print(f"{'T [s]':>6} {'drop sim':>12} {'drop formula':>13} {'fountain sim':>13} {'moment term':>12}")
    for T in np.linspace(0.5, 2.0, 4):
        seq = build_sg_butterfly(sp, env, dp, T)
        drop = gradient_phase(seq, sp, env).gradient_part
        # a launch at g T / 2 cancels the gravity contribution
        up = PhaseSpacePoint(0.0, -env.f0 * T / 2)
        fountain = gradient_phase(seq, sp, env, up).gradient_part
        print(
            f"{T:6.2f} {drop:12.5g} {formula_hbark_zero(env, sp, 0.0, dp, T):13.5g}"
            f" {fountain:13.5g} {moment_phase_term(env, sp, dp, T):12.5g}"
        )

# Rydberg moments boost the fountain phase by the ratio of the prefactors
