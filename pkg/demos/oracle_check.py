"""
Closed-form segments vs a numerical integrator
==============================================

Every constant-force segment is propagated with hyperbolic/trigonometric
closed forms. Check them against RK4 + Simpson on random cases.
"""

from sgbutterfly import sweeps
from sgbutterfly.model import PhaseSpacePoint
from sgbutterfly.propagator import oracle_integrate, propagate_segment, segment_phase

m, K, F = 1.42e-25, 1.42e-25 * 0.5, -1.42e-25 * 9.8
start = PhaseSpacePoint(0.01, 1.42e-25 * 0.3)
end = propagate_segment(start, F, K, m, 2.0).end
ref = oracle_integrate(start, lambda t: F, K, m, 2.0, 1.054571817e-34)
print("closed form:", end.z, end.p, segment_phase(start, F, K, m, 2.0, 1.054571817e-34))
print("RK4/Simpson:", ref.z, ref.p, ref.phase)

# the same, vectorised over 1000 random segments
for name, value in sweeps.validate(cases=1000, seed=1).items():
    print(f"{name:18s} {value:.2e}")
