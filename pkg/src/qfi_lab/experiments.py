"""Figure datasets, sweeps and the two-time optimisation.

All quantities are dimensionless: frequencies in units of the signal
amplitude Omega and times in units of 1/Omega (``rabi`` defaults to 1).
"""

from __future__ import annotations

import copy
import io
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import control, fisher
from .dynamics import (
    HamiltonianSpec,
    Kind,
    RotatingFrame,
    evolve_trace,
    slot_trace,
)
from .su2 import DOWN_X, UP_X, X_AXIS, InvalidArgument, pauli_exp

SCENARIOS = ("fig1a", "fig1b", "fig3", "fig4")

UNITS = "frequencies in units of Omega, times in units of 1/Omega"

# Per-scenario defaults; a config file overrides any subset.
DEFAULTS: dict[str, dict] = {
    "fig1a": {
        "rabi": 1.0, "omega": 0.02, "delta_over_omega": [0.08, 0.04],
        "t_min": 1.0, "t_max": 6250.0, "n_points": 200, "numeric_overlay": True,
    },
    "fig1b": {
        "rabi": 1.0, "omega": 0.02, "delta_over_omega": 0.08,
        "t_min": 1.0, "t_max": 2.0e5, "n_points": 200, "k": 0,
    },
    "fig3": {
        "rabi": 1.0, "delta": 1e-3, "t_max": 600.0,
        "dt_factors_top": [2.0, 1.96, 1.9, 2.06],
        "dt_factors_bottom": [2.0, 1.96, 1.8, 1.0],
        "no_control": True,
    },
    "fig4": {
        "rabi": 1.0, "delta": 0.01, "tau": 1.0, "T_max": 400.0, "n_points": 400,
        "taus": [1.0, 0.8, 0.5], "T": 100.0, "delta_min": 0.005, "delta_max": 4.0,
    },
}

_POSITIVE = {"rabi", "omega", "t_min", "t_max", "tau", "T_max", "T", "delta_max", "delta_min"}


@dataclass(frozen=True)
class ExperimentConfig:
    """A scenario id plus its parameters (defaults merged with overrides).

    ``coherence_time`` may be given for documentation; it selects no
    dynamics.
    """

    scenario: str
    params: dict = field(default_factory=dict)
    output: str | None = None

    @classmethod
    def from_dict(cls, data: dict, scenario: str | None = None) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise InvalidArgument("config must be a JSON object")
        scenario = scenario or data.get("scenario")
        if scenario not in SCENARIOS:
            raise InvalidArgument(f"unknown scenario {scenario!r}; expected one of {', '.join(SCENARIOS)}")
        params = copy.deepcopy(DEFAULTS[scenario])
        overrides = data.get("params", {})
        if not isinstance(overrides, dict):
            raise InvalidArgument("'params' must be an object")
        unknown = set(overrides) - set(params) - {"coherence_time"}
        if unknown:
            raise InvalidArgument(f"unknown parameter(s) for {scenario}: {', '.join(sorted(unknown))}")
        params.update(overrides)
        cfg = cls(scenario, params, data.get("output"))
        cfg.validate()
        return cfg

    def validate(self):
        p = self.params
        for key, value in p.items():
            values = value if isinstance(value, list) else [value]
            if isinstance(value, list) and not value:
                raise InvalidArgument(f"{key} must be a non-empty list")
            for v in values:
                if isinstance(v, bool):
                    continue
                if not isinstance(v, (int, float)) or not math.isfinite(v):
                    raise InvalidArgument(f"{key} must be finite numbers, got {v!r}")
                if key in _POSITIVE and v <= 0:
                    raise InvalidArgument(f"{key} must be positive, got {v!r}")
        if "n_points" in p and (int(p["n_points"]) != p["n_points"] or p["n_points"] < 2):
            raise InvalidArgument("n_points must be an integer >= 2")
        if "t_min" in p and not p["t_min"] < p["t_max"]:
            raise InvalidArgument("need t_min < t_max")
        if "delta_min" in p and not p["delta_min"] < p["delta_max"]:
            raise InvalidArgument("need delta_min < delta_max")

    def with_params(self, **overrides) -> "ExperimentConfig":
        params = dict(self.params, **overrides)
        cfg = ExperimentConfig(self.scenario, params, self.output)
        cfg.validate()
        return cfg

    def canonical(self) -> dict:
        return {"scenario": self.scenario, "params": self.params, "units": UNITS}


@dataclass
class CurveDataset:
    """Named series of (x, y) points plus metadata, written as long-format CSV."""

    name: str
    x_name: str
    y_name: str
    series: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def add(self, label: str, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if x.shape != y.shape or x.ndim != 1:
            raise InvalidArgument("x and y must be 1-D arrays of equal length")
        if np.any(np.diff(x) <= 0):
            raise InvalidArgument(f"x must be strictly increasing within series {label!r}")
        self.series[label] = (x, y)

    def __getitem__(self, label):
        return self.series[label]

    @property
    def columns(self) -> tuple:
        return (self.x_name, "series", self.y_name)

    def to_csv(self, target=None) -> str:
        buf = io.StringIO(newline="")
        buf.write(",".join(self.columns) + "\n")
        for label, (x, y) in self.series.items():
            for xi, yi in zip(x, y):
                buf.write(f"{xi:.17g},{label},{yi:.17g}\n")
        text = buf.getvalue()
        if target is not None:
            with open(target, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        return text


# --- helpers -------------------------------------------------------------------

def fd_step(sensitivity: float) -> float:
    """Finite-difference step for a phase with d(phase)/d(param) ~ ``sensitivity``."""
    return min(1e-6, 1e-2 / max(sensitivity, 1e-300))


def fit_scaling_exponent(dataset: CurveDataset, label: str, window=None) -> float:
    """Least-squares slope of log y against log x, optionally within ``window``."""
    x, y = dataset[label] if isinstance(dataset, CurveDataset) else dataset
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if window is not None:
        lo, hi = window
        keep = (x >= lo) & (x <= hi)
        x, y = x[keep], y[keep]
    if len(x) < 2:
        raise InvalidArgument("need at least two points in the fit window")
    if np.any(x <= 0) or np.any(y <= 0):
        raise InvalidArgument("log-log fit needs positive x and y")
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def lifetime(t, fi, ideal, threshold: float = 0.5) -> float:
    """First time the FI drops below ``threshold`` times its ideal form (nan if never)."""
    t, fi, ideal = (np.asarray(a, dtype=float) for a in (t, fi, ideal))
    below = np.nonzero(fi < threshold * ideal)[0]
    return float(t[below[0]]) if len(below) else math.nan


def oscillation_amplitude(p) -> float:
    p = np.asarray(p, dtype=float)
    return float(p.max() - p.min())


def _probability(states, out_state) -> np.ndarray:
    return np.abs(states @ np.asarray(out_state).conj()) ** 2


# --- method traces ------------------------------------------------------------

def method1_effective_states(rabi, delta, times, phase=0.0, psi0=DOWN_X):
    """States under the method-1 effective Hamiltonian Omega sin(2 delta t + phi) sy."""
    h = control.method1_effective_hamiltonian(rabi, delta, phase)
    return evolve_trace(h, None, times) @ psi0


def method1_pulsed_states(rabi, delta, times, dt, phase=0.0, psi0=DOWN_X):
    """Full method-1 evolution: H1 at detuning ``delta`` (frame removed) with Y pulses every ``dt``.

    ``times`` should be even multiples of ``dt`` so the toggling frame is the identity.
    """
    T = float(np.max(times))
    h = HamiltonianSpec(Kind.H1, rabi, delta, phase)
    seq = control.build_method1(0.0, dt, T, rabi_estimate=rabi)
    return evolve_trace(h, seq, times, T) @ psi0


def method2_states(rabi, delta, n_slots, dt, phase=0.0, psi0=DOWN_X, sample_every=1):
    """Exact stroboscopic method-2 states after each ``sample_every`` slots."""
    pulse = pauli_exp(X_AXIS, math.pi / 2)
    return slot_trace(delta, rabi, dt, n_slots, pulse, phase, sample_every) @ psi0


def method2_pulsed_states(rabi, delta, times, dt, T=None, phase=0.0, psi0=DOWN_X):
    """Method-2 states from the piecewise propagator (any pulse spacing)."""
    T = float(np.max(times)) if T is None else T
    h = HamiltonianSpec(Kind.H1, rabi, delta, phase)
    seq = control.build_method2(rabi, 0, T, dt=dt)
    return evolve_trace(h, seq, times, T) @ psi0


def free_states(rabi, delta, times, phase=0.0, psi0=DOWN_X):
    h = HamiltonianSpec(Kind.H1, rabi, delta, phase)
    return evolve_trace(h, None, times) @ psi0


def method1_numeric_fi(rabi, delta, times, pulsed_dt=None, phase=0.0):
    """Classical FI of P(|down_x> -> |up_x>) for the method-1 evolution.

    Uses the effective Hamiltonian, or the full pulsed evolution when
    ``pulsed_dt`` is given.
    """
    times = np.asarray(times, dtype=float)
    h = fd_step(rabi * times.max() ** 2)
    if pulsed_dt is None:
        P = lambda d: _probability(method1_effective_states(rabi, d, times, phase), UP_X)  # noqa: E731
    else:
        P = lambda d: _probability(method1_pulsed_states(rabi, d, times, pulsed_dt, phase), UP_X)  # noqa: E731
    values, _ = fisher.classical_fi_trace(P, delta, h)
    return values


# --- figures ------------------------------------------------------------------

def _fig1_times(p):
    return np.geomspace(p["t_min"], p["t_max"], int(p["n_points"]))


def run_fig1(cfg: ExperimentConfig) -> CurveDataset:
    p = cfg.params
    rabi = p["rabi"]
    t = _fig1_times(p)
    ds = CurveDataset(cfg.scenario, "t", "fi", metadata={"units": UNITS, "params": dict(p)})
    bound = fisher.CLOSED_FORMS["optimal_h1"].func(rabi, t)
    formulas = ["optimal_h1", "method1"]
    if cfg.scenario == "fig1a":
        for ratio in p["delta_over_omega"]:
            delta = ratio * p["omega"]
            ds.add(f"method1_delta={ratio:g}w", t, fisher.method1_fi(rabi, delta, t))
            if p["numeric_overlay"]:
                ds.add(f"method1_numeric_delta={ratio:g}w", t, method1_numeric_fi(rabi, delta, t))
        ds.add("optimal", t, bound)
    elif cfg.scenario == "fig1b":
        delta = p["delta_over_omega"] * p["omega"]
        k = int(p["k"])
        dt = control.method2_spacing(rabi, k)
        ds.add("method1", t, fisher.method1_fi(rabi, delta, t))
        slots = np.unique(np.maximum(1, np.round(t / dt).astype(int)))
        ts = slots * dt
        h = fd_step(ts.max() ** 2 / dt)
        n = int(slots.max())
        qfi = fisher.qfi_state_trace(lambda d: method2_states(rabi, d, n, dt)[slots - 1], delta, h)
        ds.add("method2_numeric", ts, qfi)
        ds.add("method2_closed", t, control.method2_fisher(rabi, t, k))
        ds.add("optimal", t, bound)
        formulas.append("method2")
        ds.metadata["method1_lifetime"] = lifetime(t, fisher.method1_fi(rabi, delta, t), bound)
        ds.metadata["method2_lifetime"] = lifetime(ts, qfi, control.method2_fisher(rabi, ts, k))
        ds.metadata["method2_lifetime_estimate"] = control.method2_lifetime_estimate(rabi, delta)
    else:
        raise InvalidArgument(f"run_fig1 does not handle scenario {cfg.scenario!r}")
    ds.metadata["formulas"] = formulas
    return ds


def _dt_label(factor):
    return f"dt=pi/({factor:g}Omega)"


def run_fig3(cfg: ExperimentConfig) -> tuple[CurveDataset, CurveDataset]:
    """Transition-probability traces (top) and classical FI traces (bottom) for mistimed pulses."""
    p = cfg.params
    rabi, delta, T = p["rabi"], p["delta"], p["t_max"]
    meta = {"units": UNITS, "params": dict(p), "initial_state": "down_x", "measurement": "x basis"}
    top = CurveDataset("fig3_top", "t", "p", metadata=dict(meta))
    bottom = CurveDataset("fig3_bottom", "t", "fi", metadata=dict(meta))
    amplitudes = {}
    for factor in p["dt_factors_top"]:
        dt = math.pi / (factor * rabi)
        ts = dt * np.arange(1, int(math.floor(T / dt + 1e-9)) + 1)
        P = _probability(method2_pulsed_states(rabi, delta, ts, dt), UP_X)
        top.add(_dt_label(factor), ts, P)
        amplitudes[_dt_label(factor)] = oscillation_amplitude(P)
    top.metadata["amplitudes"] = amplitudes

    exponents = {}
    for factor in p["dt_factors_bottom"]:
        dt = math.pi / (factor * rabi)
        ts = dt * np.arange(1, int(math.floor(T / dt + 1e-9)) + 1)
        h = fd_step(ts.max() ** 2 / dt)
        fi, _ = fisher.classical_fi_trace(
            lambda d: _probability(method2_pulsed_states(rabi, d, ts, dt), UP_X), delta, h)
        bottom.add(_dt_label(factor), ts, fi)
    if p["no_control"]:
        dt = math.pi / (2 * rabi)
        ts = dt * np.arange(1, int(math.floor(T / dt + 1e-9)) + 1)
        fi, _ = fisher.classical_fi_trace(
            lambda d: _probability(free_states(rabi, d, ts), UP_X), delta, fd_step(ts.max() ** 2))
        bottom.add("no_control", ts, fi)
    for label, (x, y) in bottom.series.items():
        keep = y > 0
        if keep.sum() >= 2:
            exponents[label] = float(np.polyfit(np.log(x[keep]), np.log(y[keep]), 1)[0])
    bottom.metadata["loglog_slopes"] = exponents
    return top, bottom


def _crossings(x, y1, y2):
    d = np.asarray(y1) - np.asarray(y2)
    idx = np.nonzero(np.sign(d[1:]) != np.sign(d[:-1]))[0]
    out = []
    for i in idx:
        # linear interpolation of the sign change
        out.append(float(x[i] - d[i] * (x[i + 1] - x[i]) / (d[i + 1] - d[i])))
    return out


def run_fig4(cfg: ExperimentConfig) -> tuple[CurveDataset, CurveDataset]:
    """Segmented H2 information: FI against total time (top) and against detuning (bottom)."""
    p = cfg.params
    rabi, tau = p["rabi"], p["tau"]
    meta = {"units": UNITS, "params": dict(p)}
    top = CurveDataset("fig4_top", "T", "fi", metadata=dict(meta, formulas=[
        "h2_segmented_sum", "h2_small_delta", "h2_small_delta_limit", "h2_intermediate"]))
    windows = np.unique(np.round(np.linspace(1, p["T_max"] / tau, int(p["n_points"]))).astype(int))
    Ts = windows * tau
    delta = p["delta"]
    exact = np.array([fisher.CLOSED_FORMS["h2_segmented_sum"].func(rabi, delta, tau, T) for T in Ts])
    top.add("exact_sum", Ts, exact)
    top.add("small_delta_formula", Ts, [fisher.h2_small_delta_fi(rabi, delta, tau, T) for T in Ts])
    top.add("envelope", Ts, 16 / 3 * rabi**2 * tau * Ts**3)
    top.add("half_envelope", Ts, 16 / 6 * rabi**2 * tau * Ts**3)

    T = p["T"]
    deltas = np.linspace(p["delta_min"], p["delta_max"], int(p["n_points"]))
    bottom = CurveDataset("fig4_bottom", "delta", "fi", metadata=dict(meta, formulas=[
        "h2_segmented_sum", "h2_large_delta"]))
    curves = {}
    for tau_i in p["taus"]:
        n = int(math.floor(T / tau_i + 1e-9))
        starts = tau_i * np.arange(n)
        vals = np.array([np.sum(fisher.h2_window_qfi(rabi, d, starts, tau_i)) for d in deltas])
        curves[tau_i] = vals
        bottom.add(f"exact_tau={tau_i:g}", deltas, vals)
        bottom.add(f"approx_tau={tau_i:g}", deltas,
                   8 * (rabi / deltas) ** 2 * T**3 / (3 * tau_i) * np.sin(deltas * tau_i) ** 2)
    taus = sorted(p["taus"], reverse=True)
    crossings = {}
    for a, b in zip(taus, taus[1:]):
        found = _crossings(deltas, curves[a], curves[b])
        crossings[f"{a:g}/{b:g}"] = found[0] if found else None
    bottom.metadata["first_crossings"] = crossings
    bottom.metadata["optimal_delta_limits"] = {f"{t:g}": 1.1656 / t for t in taus}
    return top, bottom


def run_figure(cfg: ExperimentConfig) -> list[CurveDataset]:
    if cfg.scenario in ("fig1a", "fig1b"):
        return [run_fig1(cfg)]
    if cfg.scenario == "fig3":
        return list(run_fig3(cfg))
    if cfg.scenario == "fig4":
        return list(run_fig4(cfg))
    raise InvalidArgument(f"unknown scenario {cfg.scenario!r}")


# --- two measurement times ----------------------------------------------------

@dataclass(frozen=True)
class TwoTimeResult:
    t1: float
    t2: float | None
    coefficient: float        # per-probe effective FI / (Omega^2 T^4)
    total_coefficient: float  # summed two-time effective FI / (Omega^2 T^4)


def method2_model(rabi: float) -> Callable:
    dt = math.pi / (2 * rabi)
    return lambda t: (lambda d, ph: float(np.sin(d * t * t / dt + t * ph / dt) ** 2))


def method1_model(rabi: float) -> Callable:
    def at(t):
        return lambda d, ph: float(np.sin(control.method1_rotation_angle(rabi, d, t, ph)) ** 2)
    return at


def optimize_two_times(rabi: float, T: float, phase_known: bool = False, method: int = 2,
                       n_grid: int = 200, phase: float = 0.2, delta: float | None = None) -> TwoTimeResult:
    """Best pair of measurement times in (0, T] for estimating delta.

    Each probe measures once at its own time; the summed 2x2 FI matrix
    is scored by 1/(M^-1)_{delta,delta}.  With the phase known only the
    delta-delta entry matters and a single time is returned.
    """
    if not (T > 0 and rabi > 0):
        raise InvalidArgument("need T > 0 and Omega > 0")
    if int(n_grid) != n_grid or n_grid < 100:
        raise InvalidArgument("grid must have at least 100 points per axis")
    if method == 2:
        model = method2_model(rabi)
        delta = 1e-3 * rabi if delta is None else delta
    elif method == 1:
        model = method1_model(rabi)
        delta = 1e-3 / T if delta is None else delta
    else:
        raise InvalidArgument("method must be 1 or 2")
    t = T * np.arange(1, n_grid + 1) / n_grid
    mats = np.array([fisher.fi_matrix_2(model(ti), (delta, phase)).matrix for ti in t])
    scale = rabi**2 * T**4
    if phase_known:
        i = int(np.argmax(mats[:, 0, 0]))
        return TwoTimeResult(float(t[i]), None, mats[i, 0, 0] / scale, mats[i, 0, 0] / scale)
    a = mats[:, None] + mats[None, :]
    det = a[..., 0, 0] * a[..., 1, 1] - a[..., 0, 1] ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        eff = np.where(a[..., 1, 1] > 0, det / a[..., 1, 1], 0.0)
    # drop numerically singular pairs (including t1 == t2)
    norm = a[..., 0, 0] * a[..., 1, 1]
    eff = np.where(det > 1e-10 * norm, eff, 0.0)
    i, j = np.unravel_index(int(np.argmax(eff)), eff.shape)
    t1, t2 = (t[i], t[j]) if t[i] >= t[j] else (t[j], t[i])
    best = float(eff[i, j])
    return TwoTimeResult(float(t1), float(t2), best / 2 / scale, best / scale)


# --- H2 under method 2 ------------------------------------------------------------

@dataclass(frozen=True)
class LifetimeReport:
    times: np.ndarray
    qfi: np.ndarray
    ideal: np.ndarray
    lifetime: float
    early_ratio: float  # measured / ideal at the first few samples


def h2_method2_states(rabi, carrier, delta, times, dt, max_step, phase=0.0, psi0=DOWN_X):
    """H2 = Omega sin(2 omega t) sz in the frame of omega' sy, with X pulses every ``dt``.

    The frame drift omega' = carrier and omega = carrier + delta; no
    rotating-wave approximation is made.
    """
    T = float(np.max(times))
    h = RotatingFrame(HamiltonianSpec(Kind.H2, rabi, carrier + delta, phase), carrier, axis="y")
    seq = control.build_method2(rabi / 2, 0, T, dt=dt)
    return evolve_trace(h, seq, times, T, max_step=max_step) @ psi0


def h2_method2_lifetime(rabi: float, carrier: float, delta: float, t_max: float,
                        n_samples: int = 60, steps_per_period: int = 40) -> LifetimeReport:
    """Measured method-2 lifetime for H2 (effective amplitude Omega/2, spacing pi/Omega)."""
    dt = math.pi / rabi
    slots = np.unique(np.round(np.geomspace(1, t_max / dt, n_samples)).astype(int))
    times = slots * dt
    max_step = math.pi / (steps_per_period * (2 * carrier + abs(delta) + rabi))
    h = fd_step(times.max() ** 2 / dt)
    qfi = fisher.qfi_state_trace(
        lambda d: h2_method2_states(rabi, carrier, d, times, dt, max_step), delta, h)
    ideal = control.method2_fisher(rabi / 2, times)
    return LifetimeReport(times, qfi, ideal, lifetime(times, qfi, ideal), float(np.mean(qfi[:3] / ideal[:3])))


def h2_method2_lifetime_rwa(rabi: float, delta: float, t_max: float, n_samples: int = 60) -> LifetimeReport:
    """H2 under method 2 after the rotating-wave approximation.

    In the omega' sy frame H2 reduces to H1 with amplitude Omega/2 (axes
    relabelled), so this is :func:`h1_method2_lifetime` at ``rabi / 2``.
    """
    return h1_method2_lifetime(rabi / 2, delta, t_max, n_samples)


def h1_method2_lifetime(rabi: float, delta: float, t_max: float, n_samples: int = 60) -> LifetimeReport:
    """Reference: method-2 lifetime for H1 with the same rule."""
    dt = math.pi / (2 * rabi)
    slots = np.unique(np.round(np.geomspace(1, t_max / dt, n_samples)).astype(int))
    n = int(slots.max())
    times = slots * dt
    h = fd_step(times.max() ** 2 / dt)
    qfi = fisher.qfi_state_trace(lambda d: method2_states(rabi, d, n, dt)[slots - 1], delta, h)
    ideal = control.method2_fisher(rabi, times)
    return LifetimeReport(times, qfi, ideal, lifetime(times, qfi, ideal), float(np.mean(qfi[:3] / ideal[:3])))


# --- sweep metrics ------------------------------------------------------------

def _metric_oscillation_amplitude(rabi=1.0, delta=1e-3, t_max=600.0, dt_factor=2.0, **_):
    dt = math.pi / (dt_factor * rabi)
    ts = dt * np.arange(1, int(math.floor(t_max / dt + 1e-9)) + 1)
    return oscillation_amplitude(_probability(method2_pulsed_states(rabi, delta, ts, dt), UP_X))


def _metric_h2_total_fi(rabi=1.0, delta=1.0, T=1.0e4, tau=1.0, **_):
    n = int(math.floor(T / tau + 1e-9))
    return float(np.sum(fisher.h2_window_qfi(rabi, delta, tau * np.arange(n), tau)))


def _metric_no_control_total_fi(rabi=1.0, omega=0.0, T=100.0, tau=0.1, **_):
    return fisher.closed_form_fi("no_control_segmented", rabi=rabi, omega=omega, tau=tau, T=T).value


SWEEP_METRICS: dict[str, Callable] = {
    "oscillation_amplitude": _metric_oscillation_amplitude,
    "h2_total_fi": _metric_h2_total_fi,
    "no_control_total_fi": _metric_no_control_total_fi,
}

SWEEP_AXES = ("dt_factor", "tau", "delta", "omega", "rabi", "T", "t_max")
