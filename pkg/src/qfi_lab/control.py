"""Control sequences for frequency sensing and their effective-Hamiltonian predictions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import HamiltonianSpec, HamiltonianSum, Kind
from .su2 import X_AXIS, Y_AXIS, InvalidArgument, unit_axis

# library policy: method 1 needs Omega * dt << 1
METHOD1_MAX_RABI_DT = 0.3

LABELS = ("Pang", "Method1", "Method2", "H2PulseTrain", "None")


@dataclass(frozen=True)
class PulseEvent:
    """Instantaneous rotation by ``angle`` (Bloch-sphere radians) about ``axis``."""

    time: float
    axis: tuple = X_AXIS
    angle: float = math.pi

    def __post_init__(self):
        if not (math.isfinite(self.time) and self.time >= 0):
            raise InvalidArgument(f"pulse time must be finite and >= 0, got {self.time!r}")
        if not math.isfinite(self.angle):
            raise InvalidArgument("pulse angle must be finite")
        object.__setattr__(self, "axis", tuple(float(a) for a in unit_axis(self.axis)))


@dataclass(frozen=True)
class ControlSequence:
    """Frame drift, an optional additive drive and a train of ideal pulses.

    ``frame_drift`` adds ``frame_drift * sz`` and moves to its interaction
    picture; pulse axes are given in that frame.
    """

    frame_drift: float = 0.0
    pulses: tuple = ()
    label: str = "None"
    drive: object = None
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.label not in LABELS:
            raise InvalidArgument(f"unknown control label {self.label!r}")
        pulses = tuple(self.pulses)
        times = [p.time for p in pulses]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise InvalidArgument("pulse times must be strictly increasing")
        object.__setattr__(self, "pulses", pulses)

    @property
    def pulse_times(self) -> np.ndarray:
        return np.array([p.time for p in self.pulses], dtype=float)

    def __len__(self):
        return len(self.pulses)


def _train(dt: float, T: float, axis, first: float | None = None) -> tuple:
    if not dt > 0:
        raise InvalidArgument(f"pulse spacing must be positive, got {dt!r}")
    first = dt if first is None else first
    # tolerance so that T = N dt keeps its last pulse despite rounding
    n = int(math.floor((T - first) / dt + 1e-9)) + 1 if T >= first - 1e-12 * dt else 0
    times = first + dt * np.arange(max(n, 0))
    times = np.minimum(times, T)
    return tuple(PulseEvent(float(t), axis) for t in times)


def build_pang_control(rabi: float, frame_drift: float, T: float, mode: str = "frame") -> ControlSequence:
    """Signal-cancelling drive -Omega(sx cos 2w't + sy sin 2w't) + w' sz.

    ``mode="frame"`` keeps the w' sz term as a rotating frame (the returned
    propagators are interaction-picture ones); ``mode="lab"`` adds every
    term literally as a lab-frame drive.
    """
    if not rabi > 0:
        raise InvalidArgument("Pang control needs Omega > 0")
    cancel = HamiltonianSpec(Kind.H1, rabi, frame_drift, phase=math.pi)
    params = {"rabi": rabi, "frame_drift": frame_drift, "T": T, "mode": mode}
    if mode == "frame":
        return ControlSequence(frame_drift, (), "Pang", HamiltonianSum((cancel,)), params)
    if mode == "lab":
        drive = HamiltonianSum((cancel, HamiltonianSpec(Kind.Z_DRIFT, drift=frame_drift)))
        return ControlSequence(0.0, (), "Pang", drive, params)
    raise InvalidArgument(f"mode must be 'frame' or 'lab', got {mode!r}")


def build_method1(frame_drift: float, dt: float, T: float, rabi_estimate: float | None = None) -> ControlSequence:
    """Frame ``frame_drift`` plus sigma_Y pi-pulses every ``dt``."""
    if rabi_estimate is not None and rabi_estimate * dt > METHOD1_MAX_RABI_DT:
        raise InvalidArgument(
            f"Omega*dt = {rabi_estimate * dt:.3g} > {METHOD1_MAX_RABI_DT}: pulses too sparse "
            "to cancel the sigma_X term"
        )
    pulses = _train(dt, T, Y_AXIS)
    return ControlSequence(frame_drift, pulses, "Method1", None, {"dt": dt, "T": T})


def method2_spacing(rabi_estimate: float, k: int = 0) -> float:
    return (2 * k + 1) * math.pi / (2 * rabi_estimate)


def build_method2(rabi_estimate: float, k: int, T: float, frame_drift: float = 0.0,
                  dt: float | None = None) -> ControlSequence:
    """sigma_X pi-pulses every dt = (2k+1) pi / (2 Omega_est).

    ``dt`` overrides the spacing (used for timing-robustness sweeps).
    """
    if not rabi_estimate > 0:
        raise InvalidArgument("Omega estimate must be positive")
    if int(k) != k or k < 0:
        raise InvalidArgument("k must be a non-negative integer")
    spacing = method2_spacing(rabi_estimate, k) if dt is None else dt
    pulses = _train(spacing, T, X_AXIS)
    return ControlSequence(frame_drift, pulses, "Method2", None,
                           {"rabi_estimate": rabi_estimate, "k": k, "dt": spacing, "T": T})


def h2_pulse_times(frame_frequency: float, T: float) -> np.ndarray:
    """pi/(4 w') (2N + 1) for N = 0, 1, ... up to T."""
    if not frame_frequency > 0:
        raise InvalidArgument("w' must be positive")
    quarter = math.pi / (4 * frame_frequency)
    n = int(math.floor((T / quarter - 1) / 2 + 1e-9)) + 1 if T >= quarter else 0
    return quarter * (2 * np.arange(n) + 1)


def build_h2_pulse_train(frame_frequency: float, T: float) -> ControlSequence:
    pulses = tuple(PulseEvent(float(t), X_AXIS) for t in h2_pulse_times(frame_frequency, T))
    return ControlSequence(0.0, pulses, "H2PulseTrain", None, {"frame_frequency": frame_frequency, "T": T})


def transition_probability(U, psi0, psi_out) -> float:
    """|<psi_out| U |psi0>|^2 clipped to [0, 1]."""
    amp = np.vdot(np.asarray(psi_out, dtype=complex), np.asarray(U) @ np.asarray(psi0, dtype=complex))
    return float(min(1.0, max(0.0, abs(amp) ** 2)))


def complement(p: float) -> float:
    return 1.0 - p


# --- effective-Hamiltonian predictions -------------------------------------

def pang_effective_hamiltonian(rabi: float, delta: float) -> HamiltonianSpec:
    """2 Omega delta t sigma_Y."""
    return HamiltonianSpec(Kind.EFFECTIVE_LINEAR_Y, rabi, delta)


def pang_phase(rabi: float, delta: float, t):
    """Relative phase 2 delta Omega t^2 (Bloch rotation angle about Y)."""
    return 2 * delta * rabi * np.asarray(t, dtype=float) ** 2


def pang_probability(rabi: float, delta: float, t):
    """Transition probability sin^2(phase / 2) from a sigma_X eigenstate."""
    return np.sin(0.5 * pang_phase(rabi, delta, t)) ** 2


def method1_effective_hamiltonian(rabi: float, delta: float, phase: float = 0.0) -> HamiltonianSpec:
    """Omega sigma_Y sin(2 delta t + phase)."""
    return HamiltonianSpec(Kind.EFFECTIVE_SIN_Y, rabi, delta, phase)


def method1_rotation_angle(rabi: float, delta: float, t, phase: float = 0.0):
    """Integral of Omega sin(2 delta s + phase) over (0, t)."""
    t = np.asarray(t, dtype=float)
    if delta == 0:
        return rabi * np.sin(phase) * t
    return rabi * (np.cos(phase) - np.cos(2 * delta * t + phase)) / (2 * delta)


def method1_probability(rabi: float, delta: float, t, phase: float = 0.0):
    """Transition probability |down_x> -> |up_x> under the method-1 effective Hamiltonian."""
    return np.sin(method1_rotation_angle(rabi, delta, t, phase)) ** 2


def method2_probability(delta: float, t, dt: float, phase: float = 0.0):
    """sin^2(delta t^2 / dt + (t / dt) phase)."""
    t = np.asarray(t, dtype=float)
    return np.sin(delta * t**2 / dt + (t / dt) * phase) ** 2


def method2_fisher(rabi: float, t, k: int = 0):
    """4 Omega^2 t^4 (2 / (pi (2k + 1)))^2."""
    return 4 * rabi**2 * np.asarray(t, dtype=float) ** 4 * (2 / (math.pi * (2 * k + 1))) ** 2


def method2_lifetime_estimate(rabi: float, delta: float) -> float:
    """Order-of-magnitude duration Omega / delta^2 of the t^4 regime."""
    return rabi / delta**2


def h2_effective_hamiltonian(rabi: float, delta: float) -> HamiltonianSpec:
    """(2/pi) Omega sin(2 delta t) sigma_Z."""
    return HamiltonianSpec(Kind.H2, 2 * rabi / math.pi, delta)


def h2_effective_phase(rabi: float, delta: float, t):
    """Integral of (2/pi) Omega sin(2 delta s) over (0, t)."""
    t = np.asarray(t, dtype=float)
    if delta == 0:
        return np.zeros_like(t)
    return (rabi / math.pi) * (1 - np.cos(2 * delta * t)) / delta


def h2_pulse_train_fisher(rabi: float, t):
    """(4/pi)^2 Omega^2 t^4, valid for delta t << 1."""
    return (4 / math.pi) ** 2 * rabi**2 * np.asarray(t, dtype=float) ** 4
