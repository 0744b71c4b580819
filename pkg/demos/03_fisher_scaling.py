"""Fisher information that grows as t^4, and how long that lasts.

Slow pulses (Omega dt << 1) keep the optimal 4 Omega^2 t^4 growth only up
to t ~ 1/delta.  Pulses every pi/(2 Omega) give up a factor (2/pi)^2 but
last far longer.
"""

import numpy as np

from qfi_lab import control, experiments, fisher
from qfi_lab.dynamics import HamiltonianSpec, Kind

rabi, delta = 1.0, 1.6e-3
bound = fisher.qfi_upper_bound(HamiltonianSpec(Kind.H1, rabi, delta), 100.0).value
print(f"upper bound at T = 100: {bound:.4e}  (4 Omega^2 T^4 = {4 * 100.0**4:.4e})")

t = np.geomspace(1, 2e4, 400)
ideal = 4 * rabi**2 * t**4
life1 = experiments.lifetime(t, fisher.method1_fi(rabi, delta, t), ideal)
print(f"slow pulses: FI falls below half the bound at t = {life1:.0f}  (1/delta = {1 / delta:.0f})")

rep = experiments.h1_method2_lifetime(rabi, delta, 6e4, n_samples=50)
print(f"fast pulses: FI falls below half of 4 Omega^2 t^4 (2/pi)^2 at t = {rep.lifetime:.0f}"
      f"  (Omega/delta^2 = {control.method2_lifetime_estimate(rabi, delta):.0f})")

early = rep.times < 0.1 * rep.lifetime
slope = experiments.fit_scaling_exponent((rep.times[early], rep.qfi[early]), None)
print(f"fast pulses: log-log slope before the lifetime = {slope:.3f}")
