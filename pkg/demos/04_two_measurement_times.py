"""Estimating a frequency when the initial phase is unknown.

One measurement time gives a rank-one 2x2 Fisher matrix for (delta, phi),
so delta alone cannot be bounded.  Two probes measured at different times
fix this; a grid search finds the best pair.
"""

import math

from qfi_lab import experiments, fisher

model = experiments.method2_model(1.0)
M = fisher.fi_matrix_2(model(1.0), (1e-3, 0.2))
print("single time: eigenvalues", M.eigenvalues, "-> CRB", fisher.crb_variance(M))

M2 = M + fisher.fi_matrix_2(model(0.45), (1e-3, 0.2))
print(f"two times:   CRB for delta = {fisher.crb_variance(M2):.4g}")

r = experiments.optimize_two_times(1.0, 1.0)
print(f"best pair t1 = {r.t1:.3f}, t2 = {r.t2:.3f} (ratio {r.t2 / r.t1:.3f}),"
      f" per-probe FI = {r.coefficient / (2 / math.pi) ** 2:.4f} (2/pi)^2 Omega^2 T^4")

known = experiments.optimize_two_times(1.0, 1.0, phase_known=True)
print(f"known phase: measure once at t = {known.t1:.2f}, FI = {known.coefficient:.4f} Omega^2 T^4")

for phi in (0.0, math.pi / 4, math.pi / 2):
    c = experiments.optimize_two_times(1.0, 1.0, method=1, phase=phi).coefficient
    print(f"slow pulses, phi = {phi:.3f}: per-probe coefficient {c:.5f}")
