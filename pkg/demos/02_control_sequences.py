"""Three ways to turn a weak detuning into a growing signal.

Each control sequence has an effective-Hamiltonian prediction for the
transition probability.  The full simulations below check those
predictions against the exact dynamics.
"""

import math

import numpy as np

from qfi_lab import control, experiments
from qfi_lab.dynamics import HamiltonianSpec, Kind, evolve_trace
from qfi_lab.su2 import DOWN_Z, UP_X, UP_Z

rabi = 1.0

# Pulses every pi/(2 Omega): the probability follows sin^2(delta t^2 / dt).
delta = 1e-3
dt = control.method2_spacing(rabi)
t = dt * np.arange(1, 41)
P = np.abs(experiments.method2_pulsed_states(rabi, delta, t, dt) @ UP_X.conj()) ** 2
pred = control.method2_probability(delta, t, dt)
print("x pulses every pi/(2 Omega)")
for i in (9, 19, 29, 39):
    print(f"  t = {t[i]:6.1f}   simulated {P[i]:.5f}   predicted {pred[i]:.5f}")

# A drive that cancels the signal at the estimated frequency leaves 2 Omega delta t sy.
w, delta, T = 5.0, 2e-3, 20.0
seq = control.build_pang_control(rabi, w - delta, T)
t = np.linspace(4, T, 5)
U = evolve_trace(HamiltonianSpec(Kind.H1, rabi, w), seq, t, max_step=1e-3)
print("\nsignal-cancelling drive")
for ti, u in zip(t, U):
    print(f"  t = {ti:5.1f}   simulated {control.transition_probability(u, UP_Z, DOWN_Z):.6f}"
          f"   predicted {float(control.pang_probability(rabi, delta, ti)):.6f}")

# For a z-coupled signal, x pulses at odd multiples of pi/(4 w') rectify it.
carrier, delta = 20.0, 0.01
cycle = math.pi / carrier
n = round(30 / cycle)
seq = control.build_h2_pulse_train(carrier, n * cycle)
t = cycle * np.arange(1, n + 1)
U = evolve_trace(HamiltonianSpec(Kind.H2, rabi, carrier + delta), seq, t, max_step=2.5e-4)
phi = 0.5 * np.unwrap(np.angle(U[:, 1, 1] * U[:, 0, 0].conj()))
pred = control.h2_effective_phase(rabi, delta, t)
print("\nz-coupled signal with a rectifying pulse train (phase after full cycles)")
for i in (n // 4, n // 2, n - 1):
    print(f"  t = {t[i]:5.1f}   simulated {phi[i]:.4f}   predicted {pred[i]:.4f}")
