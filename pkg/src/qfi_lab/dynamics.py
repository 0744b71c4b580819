"""Time evolution under the sensing Hamiltonians.

Every Hamiltonian here is traceless, so it is described by its Pauli
coefficients ``(hx, hy, hz)`` as functions of absolute time.  The brute-force
propagator (:func:`propagate_piecewise`) is a midpoint-rule product of exact
step exponentials; the closed-form slot unitary
(:func:`analytic_slot_unitary`) is checked against it in the tests.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .su2 import (
    I2,
    InvalidArgument,
    Z_AXIS,
    expm_pauli_batch,
    mul_batch,
    ordered_product,
    prefix_products,
    pauli_exp,
    sigma_dot,
)

if TYPE_CHECKING:
    from .control import ControlSequence

# |H| * step must stay below this for the midpoint rule to be trusted.
MAX_PHASE_PER_STEP = 0.1


class ResolutionError(ValueError):
    """The requested time step is too coarse for the Hamiltonian's norm."""


class Kind(str, enum.Enum):
    H1 = "H1"                                # Omega (sx cos(2wt+phi) + sy sin(2wt+phi))
    H2 = "H2"                                # Omega sz sin(2wt+phi)
    EFFECTIVE_LINEAR_Y = "EffectiveLinearY"  # Omega (2 w t cos(phi) + sin(phi)) sy
    EFFECTIVE_LINEAR_Z = "EffectiveLinearZ"  # (4/pi) Omega w t sz
    EFFECTIVE_SIN_Y = "EffectiveSinY"        # Omega sin(2wt+phi) sy
    Z_DRIFT = "ZDrift"                       # drift * sz only


@dataclass(frozen=True)
class HamiltonianSpec:
    """A single-qubit Hamiltonian family.

    ``frequency`` is the signal frequency for H1/H2 and the detuning for the
    effective kinds; callers form detunings themselves.  ``drift`` adds
    ``drift * sz`` to every kind (it is the only term of ``ZDrift``).
    """

    kind: Kind
    amplitude: float = 0.0
    frequency: float = 0.0
    phase: float = 0.0
    drift: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        for name in ("amplitude", "frequency", "phase", "drift"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise InvalidArgument(f"{name} must be finite, got {value!r}")
        if self.amplitude < 0:
            raise InvalidArgument("amplitude must be non-negative")

    def with_frequency(self, frequency: float) -> "HamiltonianSpec":
        return HamiltonianSpec(self.kind, self.amplitude, frequency, self.phase, self.drift)

    def with_phase(self, phase: float) -> "HamiltonianSpec":
        return HamiltonianSpec(self.kind, self.amplitude, self.frequency, phase, self.drift)

    def coefficients(self, t):
        t = np.asarray(t, dtype=float)
        om, w, ph = self.amplitude, self.frequency, self.phase
        zero = np.zeros_like(t)
        k = self.kind
        if k is Kind.H1:
            theta = 2 * w * t + ph
            hx, hy, hz = om * np.cos(theta), om * np.sin(theta), zero
        elif k is Kind.H2:
            hx, hy, hz = zero, zero, om * np.sin(2 * w * t + ph)
        elif k is Kind.EFFECTIVE_LINEAR_Y:
            hx, hy, hz = zero, om * (2 * w * t * np.cos(ph) + np.sin(ph)), zero
        elif k is Kind.EFFECTIVE_LINEAR_Z:
            hx, hy, hz = zero, zero, (4 / np.pi) * om * w * t
        elif k is Kind.EFFECTIVE_SIN_Y:
            hx, hy, hz = zero, om * np.sin(2 * w * t + ph), zero
        else:
            hx, hy, hz = zero, zero, zero
        return hx, hy, hz + self.drift

    def frequency_derivative(self, t):
        """Pauli coefficients of dH/d(frequency) at time ``t``."""
        t = np.asarray(t, dtype=float)
        om, w, ph = self.amplitude, self.frequency, self.phase
        zero = np.zeros_like(t)
        k = self.kind
        if k is Kind.H1:
            theta = 2 * w * t + ph
            return -2 * om * t * np.sin(theta), 2 * om * t * np.cos(theta), zero
        if k is Kind.H2:
            return zero, zero, 2 * om * t * np.cos(2 * w * t + ph)
        if k is Kind.EFFECTIVE_LINEAR_Y:
            return zero, 2 * om * t * np.cos(ph) + zero, zero
        if k is Kind.EFFECTIVE_LINEAR_Z:
            return zero, zero, (4 / np.pi) * om * t
        if k is Kind.EFFECTIVE_SIN_Y:
            return zero, 2 * om * t * np.cos(2 * w * t + ph), zero
        return zero, zero, zero

    def kinks(self, t0: float, t1: float) -> np.ndarray:
        """Times in (t0, t1) where |dH/d(frequency)| has a corner."""
        if self.kind in (Kind.H2, Kind.EFFECTIVE_SIN_Y) and self.frequency != 0 and self.amplitude:
            w, ph = self.frequency, self.phase
            # zeros of cos(2 w t + phi)
            m = np.arange(
                math.floor(min((2 * w * t0 + ph), (2 * w * t1 + ph)) / np.pi - 0.5) - 1,
                math.ceil(max((2 * w * t0 + ph), (2 * w * t1 + ph)) / np.pi - 0.5) + 2,
            )
            times = ((m + 0.5) * np.pi - ph) / (2 * w)
            return np.sort(times[(times > t0) & (times < t1)])
        return np.empty(0)

    def max_norm(self, t0: float, t1: float) -> float:
        """Upper bound on |h(t)| over [t0, t1]."""
        om = self.amplitude
        k = self.kind
        if k is Kind.EFFECTIVE_LINEAR_Y:
            tmax = max(abs(t0), abs(t1))
            signal = om * (2 * abs(self.frequency) * tmax + 1.0)
        elif k is Kind.EFFECTIVE_LINEAR_Z:
            signal = (4 / np.pi) * om * abs(self.frequency) * max(abs(t0), abs(t1))
        elif k is Kind.Z_DRIFT:
            signal = 0.0
        else:
            signal = om
        return signal + abs(self.drift)

    def __add__(self, other):
        return HamiltonianSum((self,)) + other


@dataclass(frozen=True)
class HamiltonianSum:
    """Sum of Hamiltonian terms (used for additive control drives)."""

    terms: tuple = ()

    def coefficients(self, t):
        t = np.asarray(t, dtype=float)
        total = [np.zeros_like(t) for _ in range(3)]
        for term in self.terms:
            for acc, c in zip(total, term.coefficients(t)):
                acc += c
        return tuple(total)

    def frequency_derivative(self, t):
        t = np.asarray(t, dtype=float)
        total = [np.zeros_like(t) for _ in range(3)]
        for term in self.terms:
            for acc, c in zip(total, term.frequency_derivative(t)):
                acc += c
        return tuple(total)

    def kinks(self, t0, t1):
        parts = [term.kinks(t0, t1) for term in self.terms]
        return np.unique(np.concatenate(parts)) if parts else np.empty(0)

    def max_norm(self, t0, t1):
        return sum(term.max_norm(t0, t1) for term in self.terms)

    @property
    def frequency(self) -> float:
        """Fastest signal frequency among the terms."""
        return max((abs(getattr(term, "frequency", 0.0)) for term in self.terms), default=0.0)

    def __add__(self, other):
        if isinstance(other, HamiltonianSum):
            return HamiltonianSum(self.terms + other.terms)
        return HamiltonianSum(self.terms + (other,))


@dataclass(frozen=True)
class RotatingFrame:
    """A Hamiltonian seen in the interaction picture of ``drift * s_axis``.

    For the default z axis the drift term is added in the lab frame and
    removed by the frame change, so transverse coefficients pick up
    exp(2i drift t): ``hx - i hy -> (hx - i hy) exp(2 i drift t)``.  With
    ``axis="y"`` the (hz, hx) pair rotates instead.
    """

    hamiltonian: object
    drift: float
    axis: str = "z"

    def __post_init__(self):
        if self.axis not in ("y", "z"):
            raise InvalidArgument(f"frame axis must be 'y' or 'z', got {self.axis!r}")

    def _rotate(self, hx, hy, hz, t):
        c = np.cos(2 * self.drift * t)
        s = np.sin(2 * self.drift * t)
        if self.axis == "y":
            return hx * c - hz * s, hy, hz * c + hx * s
        return hx * c + hy * s, hy * c - hx * s, hz

    def coefficients(self, t):
        t = np.asarray(t, dtype=float)
        return self._rotate(*self.hamiltonian.coefficients(t), t)

    def frequency_derivative(self, t):
        t = np.asarray(t, dtype=float)
        return self._rotate(*self.hamiltonian.frequency_derivative(t), t)

    def kinks(self, t0, t1):
        return self.hamiltonian.kinks(t0, t1)

    def max_norm(self, t0, t1):
        return self.hamiltonian.max_norm(t0, t1)

    @property
    def frequency(self) -> float:
        return abs(getattr(self.hamiltonian, "frequency", 0.0)) + abs(self.drift)


@dataclass(frozen=True)
class TimeGrid:
    t0: float
    t1: float
    n_steps: int

    def __post_init__(self):
        if not (math.isfinite(self.t0) and math.isfinite(self.t1)) or self.t1 <= self.t0:
            raise InvalidArgument(f"need t1 > t0, got ({self.t0}, {self.t1})")
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise InvalidArgument(f"n_steps must be a positive integer, got {self.n_steps!r}")

    @property
    def step(self) -> float:
        return (self.t1 - self.t0) / self.n_steps

    def midpoints(self) -> np.ndarray:
        return self.t0 + (np.arange(self.n_steps) + 0.5) * self.step


def hamiltonian_at(spec, t: float) -> np.ndarray:
    """The 2x2 Hermitian matrix H(t)."""
    hx, hy, hz = (float(c) for c in spec.coefficients(float(t)))
    return sigma_dot((hx, hy, hz))


def step_unitaries(hamiltonian, grid: TimeGrid) -> np.ndarray:
    """Midpoint-rule step propagators exp(-i H(t_mid) step), shape (n, 2, 2)."""
    mids = grid.midpoints()
    hx, hy, hz = hamiltonian.coefficients(mids)
    norm = np.sqrt(hx * hx + hy * hy + hz * hz)
    worst = float(norm.max()) * grid.step if norm.size else 0.0
    if worst >= MAX_PHASE_PER_STEP:
        raise ResolutionError(
            f"|H| * step = {worst:.3g} >= {MAX_PHASE_PER_STEP}; increase n_steps"
        )
    return expm_pauli_batch(hx, hy, hz, grid.step)


def propagate_piecewise(hamiltonian, grid: TimeGrid) -> np.ndarray:
    """Time-ordered product of midpoint step exponentials over ``grid``.

    Second order in the step size.  Uses absolute time, so propagating over
    (0, t1) and then (t1, t2) composes to the propagator over (0, t2).
    """
    return ordered_product(step_unitaries(hamiltonian, grid))


def analytic_slot_unitary(delta, rabi: float, t, dt: float, phase: float = 0.0) -> np.ndarray:
    """Closed-form propagator of H1 (detuning ``delta``) over (t, t + dt).

    exp(-i delta sz dt) . exp(-i (-delta sz + rabi cos(2 delta t + phase) sx
    + rabi sin(2 delta t + phase) sy) dt).  ``t`` and ``delta`` may be arrays,
    in which case a stack of unitaries is returned.
    """
    t = np.asarray(t, dtype=float)
    delta = np.asarray(delta, dtype=float)
    theta = 2 * delta * t + phase
    inner = expm_pauli_batch(rabi * np.cos(theta), rabi * np.sin(theta), -delta + 0 * theta, dt)
    outer = expm_pauli_batch(0 * theta, 0 * theta, delta + 0 * theta, dt)
    out = mul_batch(outer, inner)
    return out if out.ndim > 2 else out.reshape(2, 2)


def to_rotating_frame(U_lab, drift: float, t: float) -> np.ndarray:
    """Interaction-picture unitary exp(i drift sz t) . U_lab."""
    return pauli_exp(Z_AXIS, -drift * t) @ np.asarray(U_lab)


def from_rotating_frame(U_int, drift: float, t: float) -> np.ndarray:
    return pauli_exp(Z_AXIS, drift * t) @ np.asarray(U_int)


def default_step(max_norm: float, pulse_spacing: float | None) -> float:
    """Integrator step: min(pi / (50 |H|max), pulse spacing / 20)."""
    candidates = []
    if max_norm > 0:
        candidates.append(np.pi / (50.0 * max_norm))
    if pulse_spacing is not None and pulse_spacing > 0:
        candidates.append(pulse_spacing / 20.0)
    return min(candidates) if candidates else np.inf


def controlled_hamiltonian(hamiltonian, seq: "ControlSequence | None"):
    """Signal plus control drive, expressed in the control's rotating frame."""
    if seq is None:
        return hamiltonian
    total = hamiltonian
    if seq.drive is not None:
        total = HamiltonianSum((hamiltonian,)) + seq.drive
    if seq.frame_drift:
        total = RotatingFrame(total, seq.frame_drift)
    return total


def _pulse_unitary(pulse) -> np.ndarray:
    return pauli_exp(pulse.axis, pulse.angle / 2.0)


def _segment_products(hamiltonian, bounds: np.ndarray, steps: np.ndarray) -> np.ndarray:
    """Propagators over consecutive [bounds[j], bounds[j+1]] with steps[j] steps each."""
    n_seg = len(bounds) - 1
    if n_seg == 0:
        return np.empty((0, 2, 2), dtype=complex)
    m = int(steps.max())
    lengths = np.diff(bounds)
    h = lengths / steps
    j = np.arange(m)
    mids = bounds[:-1, None] + (j[None, :] + 0.5) * h[:, None]
    valid = j[None, :] < steps[:, None]
    hx, hy, hz = hamiltonian.coefficients(np.where(valid, mids, 0.0))
    norm = np.sqrt(hx * hx + hy * hy + hz * hz)
    worst = float(np.max(np.where(valid, norm * h[:, None], 0.0)))
    if worst >= MAX_PHASE_PER_STEP:
        raise ResolutionError(f"|H| * step = {worst:.3g} >= {MAX_PHASE_PER_STEP}; refine the grid")
    zero = np.zeros_like(hx)
    U = expm_pauli_batch(
        np.where(valid, hx, zero), np.where(valid, hy, zero), np.where(valid, hz, zero),
        np.broadcast_to(h[:, None], mids.shape),
    )
    # padded entries are exp(0) = identity; reduce along the step axis
    while U.shape[1] > 1:
        if U.shape[1] % 2:
            U = np.concatenate([U, np.broadcast_to(I2, (n_seg, 1, 2, 2))], axis=1)
        U = mul_batch(U[:, 1::2], U[:, 0::2])
    return U[:, 0]


def _validate_pulses(pulses, T: float):
    times = np.array([p.time for p in pulses], dtype=float)
    if len(times) and (np.any(times < 0) or np.any(times > T * (1 + 1e-12) + 1e-15)):
        raise InvalidArgument(f"pulse times must lie within [0, {T}]")
    if len(times) > 1 and np.any(np.diff(times) <= 0):
        raise InvalidArgument("pulse times must be strictly increasing")
    return times


def _plan(hamiltonian, seq, T, sample_times, n_steps_per_segment, max_step):
    pulses = list(seq.pulses) if seq is not None else []
    ptimes = _validate_pulses(pulses, T)
    samples = np.asarray(sample_times, dtype=float)
    if np.any(samples < 0) or np.any(samples > T * (1 + 1e-12)):
        raise InvalidArgument("sample times must lie within [0, T]")
    bounds = np.unique(np.concatenate([[0.0, T], ptimes, samples]))
    # merge boundaries closer than rounding noise
    keep = np.concatenate([[True], np.diff(bounds) > 1e-12 * max(T, 1.0)])
    bounds = bounds[keep]
    if len(bounds) < 2:
        bounds = np.array([0.0, T])
    lengths = np.diff(bounds)
    if n_steps_per_segment is not None:
        steps = np.full(len(lengths), int(n_steps_per_segment))
    else:
        spacing = float(np.min(np.diff(ptimes))) if len(ptimes) > 1 else None
        step = default_step(hamiltonian.max_norm(0.0, T), spacing)
        if max_step is not None:
            step = min(step, max_step)
        steps = np.maximum(1, np.ceil(lengths / step - 1e-9).astype(int)) if np.isfinite(step) else np.ones(len(lengths), int)
    return pulses, ptimes, bounds, steps


def _boundary_index(bounds, x):
    return int(np.argmin(np.abs(bounds - x)))


def evolve_with_pulses(
    hamiltonian,
    seq: "ControlSequence | None",
    T: float,
    n_steps_per_segment: int | None = None,
    max_step: float | None = None,
) -> np.ndarray:
    """Total interaction-picture propagator over (0, T) with instantaneous pulses.

    Segments between pulses are integrated with :func:`propagate_piecewise`
    semantics; each pulse ``exp(-i angle/2 n.sigma)`` is applied at its time.
    A pulse exactly at ``T`` is included.
    """
    U = evolve_trace(hamiltonian, seq, [T], T, n_steps_per_segment, max_step)
    return U[0]


def evolve_trace(
    hamiltonian,
    seq: "ControlSequence | None",
    sample_times: Sequence[float],
    T: float | None = None,
    n_steps_per_segment: int | None = None,
    max_step: float | None = None,
) -> np.ndarray:
    """Propagators U(0, t) at each sample time (pulses at t included).

    Returns an array of shape ``(len(sample_times), 2, 2)``.
    """
    samples = np.asarray(sample_times, dtype=float)
    if samples.ndim != 1 or len(samples) == 0:
        raise InvalidArgument("need at least one sample time")
    if np.any(np.diff(samples) < 0):
        raise InvalidArgument("sample times must be non-decreasing")
    T = float(samples[-1]) if T is None else float(T)
    if T <= 0:
        raise InvalidArgument("total time must be positive")
    h = controlled_hamiltonian(hamiltonian, seq)
    pulses, ptimes, bounds, steps = _plan(h, seq, T, samples, n_steps_per_segment, max_step)
    segs = _segment_products(h, bounds, steps)

    # pulses grouped by boundary index; pulse at boundary b acts after segment b-1
    pulse_at = {}
    for p, tp in zip(pulses, ptimes):
        pulse_at.setdefault(_boundary_index(bounds, tp), []).append(_pulse_unitary(p))
    sample_idx = [_boundary_index(bounds, s) for s in samples]

    out = np.empty((len(samples), 2, 2), dtype=complex)
    current = I2.copy()
    done = 0  # boundary index the current propagator has reached (pulses applied)
    for p in pulse_at.get(0, []):
        current = p @ current
    for k, b in enumerate(sample_idx):
        if b > done:
            ops = []
            for j in range(done, b):
                ops.append(segs[j])
                for p in pulse_at.get(j + 1, []):
                    ops.append(p)
            current = ordered_product(np.array(ops)) @ current
            done = b
        out[k] = current
    return out


def slot_trace(delta, rabi: float, dt: float, n_slots: int, pulse=None, phase: float = 0.0,
               sample_every: int = 1) -> np.ndarray:
    """Exact stroboscopic propagators for H1 with a pulse after every slot.

    Uses :func:`analytic_slot_unitary` for each slot (t_k, t_k + dt) with
    t_k = k dt; ``pulse`` (a 2x2 unitary or None) is applied after each slot.
    Returns U(0, N dt) for N = sample_every, 2 sample_every, ... <= n_slots.
    """
    k = np.arange(n_slots)
    slots = analytic_slot_unitary(delta, rabi, k * dt, dt, phase)
    if slots.ndim == 2:
        slots = slots[None]
    if pulse is not None:
        slots = mul_batch(np.broadcast_to(np.asarray(pulse, dtype=complex), slots.shape), slots)
    n_samples = n_slots // sample_every
    chunks = slots[: n_samples * sample_every].reshape(n_samples, sample_every, 2, 2)
    while chunks.shape[1] > 1:
        if chunks.shape[1] % 2:
            chunks = np.concatenate([chunks, np.broadcast_to(I2, (n_samples, 1, 2, 2))], axis=1)
        chunks = mul_batch(chunks[:, 1::2], chunks[:, 0::2])
    return prefix_products(chunks[:, 0])


__all__ = [
    "Kind",
    "HamiltonianSpec",
    "HamiltonianSum",
    "RotatingFrame",
    "TimeGrid",
    "ResolutionError",
    "hamiltonian_at",
    "step_unitaries",
    "propagate_piecewise",
    "analytic_slot_unitary",
    "to_rotating_frame",
    "from_rotating_frame",
    "controlled_hamiltonian",
    "evolve_with_pulses",
    "evolve_trace",
    "slot_trace",
    "default_step",
]
