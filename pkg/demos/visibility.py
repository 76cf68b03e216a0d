"""
Contrast loss from misalignment
===============================

At first order in K the butterfly leaves no momentum offset and a quarter of
the Mach-Zehnder position offset, so its contrast survives much longer.
"""

import numpy as np

from sgbutterfly import model
from sgbutterfly.observables import misalignment, populations, visibility
from sgbutterfly.sequences import build_mach_zehnder, build_sg_butterfly, run

sp, env, dp, ens = model.fig5_default()
print(f"cloud: sigma_z = {ens.sigma_z * 1e6:.0f} um, sigma_v = {ens.sigma_p / sp.mass * 1e3:.2f} mm/s ({ens.purity})")
print(f"{'T [s]':>6} {'C butterfly':>12} {'C MZ':>8} {'dz bf [m]':>11} {'dz MZ [m]':>11}")
for T in np.arange(1.0, 10.5, 1.0):
    bf = misalignment(*run(build_sg_butterfly(sp, env, dp, T), sp, env), env, sp)
    mz = misalignment(*run(build_mach_zehnder(sp, env, dp, T), sp, env), env, sp)
    print(f"{T:6.1f} {visibility(bf, ens):12.4f} {visibility(mz, ens):8.4f} {bf.dz:11.3e} {mz.dz:11.3e}")

# populations for a zero-phase shot at T = 5 s
C = visibility(misalignment(*run(build_mach_zehnder(sp, env, dp, 5.0), sp, env), env, sp), ens)
p1, p2 = populations(C, 0.0)
print(f"MZ at 5 s, dphi = 0: P1 = {p1:.4f}, P2 = {p2:.4f}")
