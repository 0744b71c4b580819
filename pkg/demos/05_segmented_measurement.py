"""Finite coherence: chop the total time into windows and add up.

With windows of length tau the total information grows as T^3.  Without
control the best window satisfies tan x = 2x; with a large detuning the
z-coupled signal has the same optimum in units of 1/delta.
"""

import numpy as np

from qfi_lab import experiments, fisher

opt = fisher.optimal_tau_no_control(1.0, 0.0)
print(f"no control: x* = {opt.x:.5f}, I_tot = {opt.coefficient:.4f} Omega T^3")

for tau in (0.5 * opt.tau, opt.tau, 2 * opt.tau):
    total = fisher.closed_form_fi("no_control_segmented", rabi=1.0, omega=0.0, tau=tau, T=100.0).value
    print(f"  tau = {tau:.3f}: I_tot / T^3 = {total / 100.0**3:.4f}")

print("\nz-coupled signal, window sum against the two asymptotes")
for T in (5.0, 50.0, 500.0, 5000.0):
    s = fisher.closed_form_fi("h2_segmented_sum", rabi=1.0, delta=0.01, tau=0.01, T=T).value
    print(f"  delta T = {0.01 * T:6.2f}: I_tot / ((16/3) Omega^2 tau T^3) = {s / (16 / 3 * 0.01 * T**3):.4f}")

h2 = fisher.optimal_tau_h2(1.0)
taus = np.linspace(0.5, 2.0, 7)
vals = [experiments.SWEEP_METRICS["h2_total_fi"](delta=1.0, tau=t) for t in taus]
print(f"\nlarge detuning: predicted delta tau* = {h2.tau:.4f}, coefficient {h2.coefficient:.4f}")
for t, v in zip(taus, vals):
    print(f"  delta tau = {t:.2f}: I_tot delta / (Omega^2 T^3) = {v / 1e12:.4f}")
