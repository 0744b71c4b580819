import math

import numpy as np
import pytest

from qfi_lab import control, su2
from qfi_lab.dynamics import HamiltonianSpec, Kind, evolve_trace, evolve_with_pulses
from qfi_lab.su2 import InvalidArgument


def test_method2_pulse_count_and_spacing():
    dt = control.method2_spacing(1.0, 0)
    seq = control.build_method2(1.0, 0, 40 * dt)
    assert len(seq) == 40
    assert np.allclose(np.diff(seq.pulse_times), dt)
    assert seq.pulse_times[-1] == pytest.approx(40 * dt)
    assert control.method2_spacing(2.0, 1) == pytest.approx(3 * math.pi / 4)


def test_method1_guard():
    control.build_method1(0.0, 0.1, 1.0, rabi_estimate=1.0)
    with pytest.raises(InvalidArgument):
        control.build_method1(0.0, 1.0, 10.0, rabi_estimate=1.0)


def test_invalid_sequences():
    with pytest.raises(InvalidArgument):
        control.build_method2(1.0, -1, 10.0)
    with pytest.raises(InvalidArgument):
        control.build_method2(0.0, 0, 10.0)
    with pytest.raises(InvalidArgument):
        control.ControlSequence(0.0, (control.PulseEvent(2.0), control.PulseEvent(1.0)))
    with pytest.raises(InvalidArgument):
        control.ControlSequence(label="CPMG")
    with pytest.raises(InvalidArgument):
        control.PulseEvent(-1.0)
    with pytest.raises(InvalidArgument):
        control.build_pang_control(1.0, 1.0, 1.0, mode="other")


def test_h2_pulse_times():
    t = control.h2_pulse_times(2.0, 4 * math.pi / 8 + 1e-12)
    assert np.allclose(t, [math.pi / 8, 3 * math.pi / 8])


@pytest.mark.parametrize("psi_in,psi_out", [(su2.UP_Z, su2.DOWN_Z), (su2.DOWN_Z, su2.UP_Z)])
def test_signal_cancelling_drive_gives_quadratic_phase(psi_in, psi_out):
    rabi, w, delta, T = 1.0, 5.0, 2e-3, 20.0
    seq = control.build_pang_control(rabi, w - delta, T)
    t = np.linspace(1, T, 20)
    U = evolve_trace(HamiltonianSpec(Kind.H1, rabi, w), seq, t, max_step=1e-3)
    P = [control.transition_probability(u, psi_in, psi_out) for u in U]
    assert np.max(np.abs(P - control.pang_probability(rabi, delta, t))) < 1e-3


def test_lab_and_frame_modes_agree():
    rabi, w, wp, T = 1.0, 3.0, 2.95, 4.0
    h = HamiltonianSpec(Kind.H1, rabi, w)
    U_frame = evolve_with_pulses(h, control.build_pang_control(rabi, wp, T, "frame"), T, max_step=1e-4)
    U_lab = evolve_with_pulses(h, control.build_pang_control(rabi, wp, T, "lab"), T, max_step=1e-4)
    from qfi_lab.dynamics import to_rotating_frame
    assert su2.phase_invariant_distance(to_rotating_frame(U_lab, wp, T), U_frame) < 1e-6


def test_h2_train_follows_effective_phase_at_full_cycles():
    carrier, delta = 20.0, 0.01
    cycle = math.pi / carrier
    n = round(30 / cycle)
    seq = control.build_h2_pulse_train(carrier, n * cycle)
    t = cycle * np.arange(1, n + 1)
    U = evolve_trace(HamiltonianSpec(Kind.H2, 1.0, carrier + delta), seq, t, max_step=2.5e-4)
    # after a full cycle the propagator is diagonal, diag(exp(-i phi), exp(i phi)) up to sign
    assert np.max(np.abs(U[:, 0, 1])) < 0.05
    phi = 0.5 * np.unwrap(np.angle(U[:, 1, 1] * U[:, 0, 0].conj()))
    expected = control.h2_effective_phase(1.0, delta, t)
    late = t > 5
    assert np.all(np.abs(phi[late] - expected[late]) <= 0.02 * expected[late])


def test_method1_effective_probability_small_time_limit():
    # sin^2 of the rotation angle Omega delta t^2 for delta t << 1
    t = np.array([0.5, 1.0, 2.0])
    angle = control.method1_rotation_angle(1.0, 1e-6, t)
    assert np.allclose(angle, 1e-6 * t**2, rtol=1e-5)
    assert np.allclose(control.method1_rotation_angle(1.0, 0.0, t, 0.3), np.sin(0.3) * t)


def test_method2_prediction_fisher():
    # classical FI of sin^2(delta t^2/dt) at delta -> 0 is 4 t^4/dt^2
    t, dt = 7.0, math.pi / 2
    assert control.method2_fisher(1.0, t) == pytest.approx(4 * t**4 / dt**2)
    assert control.method2_probability(0.0, t, dt) == 0.0


def test_transition_probability_is_clipped():
    assert control.transition_probability(su2.I2 * 1.0000001, su2.UP_Z, su2.UP_Z) == 1.0
    assert control.complement(0.25) == 0.75
