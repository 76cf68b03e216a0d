"""
Finite-duration gradient stages
===============================

Replace the instantaneous SG kicks by stages of length t1 and t3 = 2 t1 at
fixed delta_v, and watch how far the phase moves from the pulse limit.
"""

from sgbutterfly import model
from sgbutterfly.observables import gradient_phase
from sgbutterfly.sequences import build_sg_butterfly

sp, env, dp = model.fig3_default()

for t1 in (1e-4, 1e-3, 1e-2):
    print(f"\nt1 = {t1:g} s")
    for T in (0.1, 0.5, 1.0, 2.0):
        seq = build_sg_butterfly(sp, env, dp, T, t1)
        finite = gradient_phase(seq, sp, env).gradient_part
        pulse = gradient_phase(build_sg_butterfly(sp, env, dp, T), sp, env).gradient_part
        print(
            f"  T = {T:4.1f} s  b = {seq.params['b']:.3f} T/m  t2 = {seq.params['t2']:.4f} s"
            f"  rel. change {(finite - pulse) / pulse:+.2%}  (-3 t1/T = {-3 * t1 / T:+.2%})"
        )

# The gap scales like t1/T: the gradient stages eat into the time the arms
# spend fully separated.
