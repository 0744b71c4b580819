"""Fisher information: quantum, classical, matrix-valued and segmented.

Numerical derivatives are central differences with one Richardson step,
``D = (4 D(h/2) - D(h)) / 3``, default ``h = 1e-6 * max(|p|, 1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss

from .optimize import golden_section_max
from .su2 import TOL_HERMITIAN, InvalidArgument, eig_spread_hermitian, normalized

SOURCES = ("closed_form", "numeric_qfi", "numeric_classical", "upper_bound")

HERMITIAN_WARN = 1e-7
HERMITIAN_FAIL = 1e-5
EDGE_PROBABILITY = 1e-9
SINGULAR_CONDITION = 1e12


class NumericalDerivativeError(RuntimeError):
    """Finite-difference generator is not Hermitian enough to be trusted."""


class _Singular:
    """Marker returned by :func:`crb_variance` for a non-invertible FI matrix."""

    def __repr__(self):
        return "SINGULAR"

    def __float__(self):
        return math.inf

    def __bool__(self):
        return False


SINGULAR = _Singular()


@dataclass(frozen=True)
class FisherResult:
    value: float
    source: str
    params: dict = field(default_factory=dict)
    regime: str = ""
    flagged: bool = False

    def __post_init__(self):
        if self.source not in SOURCES:
            raise InvalidArgument(f"unknown source {self.source!r}")
        if not self.value >= -1e-12 * max(1.0, abs(self.value)):
            raise InvalidArgument(f"Fisher information must be non-negative, got {self.value!r}")
        object.__setattr__(self, "value", max(0.0, float(self.value)))

    def __float__(self):
        return self.value


@dataclass(frozen=True)
class FIMatrix2:
    """2x2 Fisher information matrix for (delta, phi)."""

    matrix: np.ndarray
    labels: tuple = ("delta", "phi")
    flagged: bool = False

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.shape != (2, 2):
            raise InvalidArgument("FI matrix must be 2x2")
        scale = max(1.0, float(np.max(np.abs(m))))
        if np.max(np.abs(m - m.T)) > 1e-10 * scale:
            raise InvalidArgument("FI matrix must be symmetric")
        m = 0.5 * (m + m.T)
        if np.linalg.eigvalsh(m)[0] < -1e-10 * scale:
            raise InvalidArgument("FI matrix must be positive semidefinite")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def __add__(self, other: "FIMatrix2") -> "FIMatrix2":
        return FIMatrix2(self.matrix + other.matrix, self.labels, self.flagged or other.flagged)

    def __radd__(self, other):
        if other == 0:
            return self
        return NotImplemented

    def __mul__(self, c: float) -> "FIMatrix2":
        return FIMatrix2(self.matrix * c, self.labels, self.flagged)

    __rmul__ = __mul__

    def index(self, which: str) -> int:
        return self.labels.index(which)

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    @property
    def eigenvalue_ratio(self) -> float:
        """Smallest over largest eigenvalue (0 for an exactly rank-1 matrix)."""
        lo, hi = self.eigenvalues
        return abs(lo) / hi if hi > 0 else 0.0


@dataclass(frozen=True)
class SegmentationPlan:
    """Back-to-back measurement windows of length ``tau`` covering ``T``."""

    tau: float
    T: float

    def __post_init__(self):
        if not (0 < self.tau <= self.T * (1 + 1e-12)):
            raise InvalidArgument(f"need 0 < tau <= T, got tau={self.tau}, T={self.T}")

    @property
    def windows(self) -> int:
        return int(math.floor(self.T / self.tau + 1e-9))

    @property
    def starts(self) -> np.ndarray:
        return self.tau * np.arange(self.windows)


# --- finite differences ------------------------------------------------------

def default_step(param: float) -> float:
    return 1e-6 * max(abs(param), 1.0)


def central_difference(f: Callable, x: float, h: float | None = None, richardson: bool = True):
    """First derivative of a scalar- or array-valued ``f`` at ``x``."""
    h = default_step(x) if h is None else h
    if not h > 0:
        raise InvalidArgument("step must be positive")

    def d(step):
        return (np.asarray(f(x + step)) - np.asarray(f(x - step))) / (2 * step)

    if not richardson:
        return d(h)
    return (4 * d(h / 2) - d(h)) / 3


def second_difference(f: Callable, x: float, h: float, richardson: bool = True):
    def d2(step):
        return (np.asarray(f(x + step)) - 2 * np.asarray(f(x)) + np.asarray(f(x - step))) / step**2

    if not richardson:
        return d2(h)
    return (4 * d2(h / 2) - d2(h)) / 3


# --- quantum Fisher information ------------------------------------------------

def qfi_generator(U_of_param: Callable, param: float, h: float | None = None,
                  return_residual: bool = False):
    """Hermitian generator i U^dagger dU/dparam by central differences.

    The raw finite-difference matrix is Hermitianised, ``(G + G^dagger)/2``;
    its anti-Hermitian part relative to ``max(1, |G|)`` is the residual.
    """
    if h is not None and not h > 0:
        raise InvalidArgument("step must be positive")
    U = np.asarray(U_of_param(param), dtype=complex)
    dU = central_difference(lambda p: np.asarray(U_of_param(p), dtype=complex), param, h)
    G = 1j * U.conj().T @ dU
    residual = float(np.max(np.abs(G - G.conj().T)) / 2 / max(1.0, float(np.max(np.abs(G)))))
    if residual > HERMITIAN_FAIL:
        raise NumericalDerivativeError(f"generator Hermiticity residual {residual:.2e} > {HERMITIAN_FAIL}")
    G = 0.5 * (G + G.conj().T)
    return (G, residual) if return_residual else G


def qfi_max(generator) -> FisherResult:
    """Maximal QFI over input states: (lambda_max - lambda_min)^2."""
    G = 0.5 * (np.asarray(generator) + np.asarray(generator).conj().T)
    lo, hi = eig_spread_hermitian(G)
    return FisherResult((hi - lo) ** 2, "numeric_qfi", {"lambda_min": lo, "lambda_max": hi})


def qfi_state(generator, psi0) -> FisherResult:
    """QFI for a given input state: 4 (<G^2> - <G>^2)."""
    G = np.asarray(generator, dtype=complex)
    if np.max(np.abs(G - G.conj().T)) > TOL_HERMITIAN * max(1.0, float(np.max(np.abs(G)))):
        raise InvalidArgument("generator must be Hermitian")
    psi = normalized(psi0)
    g = psi.conj() @ G @ psi
    g2 = psi.conj() @ G @ G @ psi
    return FisherResult(4 * max(0.0, float((g2 - g * g.conj()).real)), "numeric_qfi")


# --- classical Fisher information ---------------------------------------------

def classical_fi(P_of_param: Callable, param: float, h: float | None = None) -> FisherResult:
    """Two-outcome Fisher information (dP/dp)^2 (1/P + 1/(1 - P)).

    When P is within 1e-9 of 0 or 1 the expression is 0/0; the limit
    2 |d^2P/dp^2| is returned instead and the result is flagged.
    """
    p0 = float(P_of_param(param))
    if not -1e-12 <= p0 <= 1 + 1e-12:
        raise InvalidArgument(f"probability out of range: {p0!r}")
    if min(p0, 1 - p0) < EDGE_PROBABILITY:
        h2 = 1e-4 * max(abs(param), 1.0) if h is None else 100 * h
        curvature = float(second_difference(lambda p: float(P_of_param(p)), param, h2))
        return FisherResult(2 * abs(curvature), "numeric_classical",
                            {"P": p0, "d2P": curvature}, flagged=True)
    dp = float(central_difference(lambda p: float(P_of_param(p)), param, h))
    value = dp * dp * (1.0 / p0 + 1.0 / (1.0 - p0))
    return FisherResult(value, "numeric_classical", {"P": p0, "dP": dp})


def classical_fi_trace(P_of_param: Callable, param: float, h: float | None = None):
    """:func:`classical_fi` for a probability trace (array-valued ``P_of_param``).

    Returns ``(values, flagged)``; flagged entries used the 2 |P''| limit.
    """
    p0 = np.asarray(P_of_param(param), dtype=float)
    dp = central_difference(lambda p: np.asarray(P_of_param(p), dtype=float), param, h)
    edge = np.minimum(p0, 1 - p0) < EDGE_PROBABILITY
    with np.errstate(divide="ignore", invalid="ignore"):
        values = dp * dp * (1.0 / p0 + 1.0 / (1.0 - p0))
    if np.any(edge):
        h2 = 1e-4 * max(abs(param), 1.0) if h is None else 100 * h
        curvature = second_difference(lambda p: np.asarray(P_of_param(p), dtype=float), param, h2)
        values = np.where(edge, 2 * np.abs(curvature), values)
    return values, edge


def qfi_state_trace(states_of_param: Callable, param: float, h: float | None = None) -> np.ndarray:
    """4 (<dpsi|dpsi> - |<psi|dpsi>|^2) for a stack of states of shape (n, 2)."""
    psi = np.asarray(states_of_param(param), dtype=complex)
    dpsi = central_difference(lambda p: np.asarray(states_of_param(p), dtype=complex), param, h)
    norm = np.sum(np.abs(dpsi) ** 2, axis=-1)
    overlap = np.sum(psi.conj() * dpsi, axis=-1)
    return np.maximum(0.0, 4 * (norm - np.abs(overlap) ** 2))


def fi_matrix_2(P_of_2params: Callable, point, h=None) -> FIMatrix2:
    """FI matrix of a two-outcome measurement for two parameters.

    ``P_of_2params(a, b)`` gives the probability of one outcome.  Entries are
    (dP/da_i)(dP/da_j)(1/P + 1/(1 - P)); the matrix has rank at most one.
    """
    a, b = (float(x) for x in point)
    ha = default_step(a) if h is None else (h[0] if np.ndim(h) else h)
    hb = default_step(b) if h is None else (h[1] if np.ndim(h) else h)
    p0 = float(P_of_2params(a, b))
    if min(p0, 1 - p0) < EDGE_PROBABILITY:
        # P = sin^2(phase(a, b)) near an extremum: FI -> 2 |Hessian|
        s = 100
        haa = float(second_difference(lambda x: P_of_2params(x, b), a, s * ha))
        hbb = float(second_difference(lambda x: P_of_2params(a, x), b, s * hb))
        hab = float(central_difference(
            lambda y: central_difference(lambda x: P_of_2params(x, y), a, s * ha), b, s * hb))
        sign = 1.0 if p0 < 0.5 else -1.0
        # finite-difference noise can leave a tiny negative eigenvalue; clip it
        w, v = np.linalg.eigh(2 * sign * np.array([[haa, hab], [hab, hbb]]))
        return FIMatrix2((v * np.maximum(w, 0.0)) @ v.T, flagged=True)
    ga = float(central_difference(lambda x: P_of_2params(x, b), a, ha))
    gb = float(central_difference(lambda x: P_of_2params(a, x), b, hb))
    g = np.array([ga, gb])
    return FIMatrix2(np.outer(g, g) * (1.0 / p0 + 1.0 / (1.0 - p0)))


def crb_variance(M: FIMatrix2, which: str = "delta"):
    """(M^-1)_{which, which}, or ``SINGULAR`` if M is not safely invertible."""
    m = M.matrix if isinstance(M, FIMatrix2) else np.asarray(M, dtype=float)
    labels = M.labels if isinstance(M, FIMatrix2) else ("delta", "phi")
    i = labels.index(which)
    if not np.all(np.isfinite(m)) or np.max(np.abs(m)) == 0:
        return SINGULAR
    cond = np.linalg.cond(m)
    if not np.isfinite(cond) or cond >= SINGULAR_CONDITION:
        return SINGULAR
    return float(np.linalg.inv(m)[i, i])


def effective_fi(M: FIMatrix2, which: str = "delta") -> float:
    """1 / (M^-1)_{which, which}; zero when M is singular."""
    v = crb_variance(M, which)
    return 0.0 if v is SINGULAR else 1.0 / v


# --- segmented (finite coherence) ---------------------------------------------

def segmented_total_fi(per_window_fi: Callable, plan: SegmentationPlan) -> FisherResult:
    """Sum of per-window FI over windows starting at 0, tau, 2 tau, ..."""
    total = 0.0
    for start in plan.starts:
        total += float(per_window_fi(float(start)))
    return FisherResult(total, "numeric_qfi", {"tau": plan.tau, "T": plan.T, "windows": plan.windows})


# --- closed forms ----------------------------------------------------------------

def _g_over_delta_sq(delta, t):
    """(cos x - 1 + x sin x) / delta^2 with x = 2 delta t, cancellation-free."""
    delta = np.asarray(delta, dtype=float)
    t = np.asarray(t, dtype=float)
    x = 2 * delta * t
    small = np.abs(x) < 1e-2
    safe_delta = np.where(delta == 0, 1.0, delta)
    direct = (np.cos(x) - 1 + x * np.sin(x)) / safe_delta**2
    # (cos x - 1 + x sin x) = sum_{n>=1} (-1)^(n+1) (2n-1) x^(2n) / (2n)!
    x2 = x * x
    series = np.zeros_like(x2)
    term_coeff = [(-1) ** (n + 1) * (2 * n - 1) / math.factorial(2 * n) for n in range(1, 7)]
    for n, c in reversed(list(enumerate(term_coeff, start=1))):
        series = series * x2 + c
    series = 4 * t * t * series  # x^2 / delta^2 = 4 t^2
    return np.where(small, series, direct)


def method1_fi(rabi, delta, t):
    """(Omega^2 / delta^4)(cos 2dt - 1 + 2dt sin 2dt)^2."""
    return rabi**2 * _g_over_delta_sq(delta, t) ** 2


def _int_t2_cos(a, T):
    """Integral of t^2 cos(a t) over (0, T)."""
    aT = a * T
    if abs(aT) < 1.0:
        total, n = 0.0, 0
        while True:
            term = (-1) ** n * a ** (2 * n) * T ** (2 * n + 3) / (math.factorial(2 * n) * (2 * n + 3))
            total += term
            if abs(term) < 1e-18 * abs(total) or n > 30:
                return total
            n += 1
    return (aT**2 - 2) * math.sin(aT) / a**3 + 2 * T * math.cos(aT) / a**2


def h2_small_delta_fi(rabi, delta, tau, T):
    """16 Omega^2 tau (T^3/6 + T cos(4dT)/(16 d^2) + (8 d^2 T^2 - 1) sin(4dT)/(64 d^3)).

    Evaluated as 16 Omega^2 tau * integral of t^2 cos^2(2 delta t), which is
    the same expression without the small-delta cancellation.
    """
    return 16 * rabi**2 * tau * (T**3 / 6 + 0.5 * _int_t2_cos(4 * delta, T))


def h2_window_qfi(rabi, delta, t, tau):
    """4 (d theta / d delta)^2 for H = Omega sz sin(2 delta t) over (t, t + tau)."""
    return rabi**2 * (_g_over_delta_sq(delta, t) - _g_over_delta_sq(delta, np.asarray(t) + tau)) ** 2


def _n_windows(tau, T):
    return int(math.floor(T / tau + 1e-9))


@dataclass(frozen=True)
class ClosedForm:
    func: Callable
    regime: str
    description: str


def _ramsey_sum(tau, T):
    n = _n_windows(tau, T)
    return 4 * tau**2 * n * (4 * n * n - 1) / 3


def _controlled_sum(rabi, tau, T):
    n = _n_windows(tau, T)
    return 4 * rabi**2 * tau**4 * n * (4 * n * n - 1) / 3


def _h2_sum(rabi, delta, tau, T):
    starts = tau * np.arange(_n_windows(tau, T))
    return float(np.sum(h2_window_qfi(rabi, delta, starts, tau)))


def _no_control(rabi, omega, tau, T):
    a = math.hypot(omega, rabi)
    return 16 * rabi**2 / a**2 * math.sin(a * tau) ** 2 * T**3 / (3 * tau)


CLOSED_FORMS: dict[str, ClosedForm] = {
    "ramsey": ClosedForm(lambda t: 4 * t**2, "static sz signal", "4 t^2"),
    "optimal_h1": ClosedForm(lambda rabi, t: 4 * rabi**2 * t**4, "any t", "4 Omega^2 t^4 (tight bound for H1)"),
    "pang": ClosedForm(lambda rabi, t: 4 * rabi**2 * t**4, "|delta| t << 1", "4 Omega^2 t^4"),
    "method1": ClosedForm(method1_fi, "Omega dt, delta dt << 1",
                          "(Omega^2/delta^4)(cos 2dt - 1 + 2dt sin 2dt)^2"),
    "method1_long_time": ClosedForm(
        lambda rabi, delta, t: 4 * rabi**2 / delta**2 * math.sin(2 * delta * t) ** 2 * t**2,
        "delta t >> 1", "4 (Omega/delta)^2 sin^2(2 delta t) t^2"),
    "method2": ClosedForm(lambda rabi, t, k=0: 4 * rabi**2 * t**4 * (2 / (math.pi * (2 * k + 1))) ** 2,
                          "t << Omega/delta^2", "4 Omega^2 t^4 (2/(pi(2k+1)))^2"),
    "h2_pulse_train": ClosedForm(lambda rabi, t: (4 / math.pi) ** 2 * rabi**2 * t**4, "delta t << 1",
                                 "(4/pi)^2 Omega^2 t^4"),
    "two_time_method2_per_probe": ClosedForm(
        lambda rabi, T: 0.1 * (2 / math.pi) ** 2 * rabi**2 * T**4, "unknown phase, times T and 0.45 T",
        "(Omega^2/10)(2/pi)^2 T^4"),
    "two_time_method1_per_probe": ClosedForm(
        lambda rabi, T, phase: 0.1 * rabi**2 * T**4 * math.cos(phase) ** 2, "unknown phase, delta T << 1",
        "(Omega^2/10) T^4 cos^2(phi)"),
    "ramsey_segmented_sum": ClosedForm(_ramsey_sum, "tau = pi/(2(2N+1)), omega << Omega",
                                       "4 sum_t (2t + tau)^2, exact finite sum"),
    "ramsey_segmented_loose": ClosedForm(lambda tau, T: 16 * T**3 / tau, "tau << T",
                                          "16 T^3 / tau, variant without the 1/3 factor"),
    "ramsey_segmented_asymptotic": ClosedForm(lambda tau, T: 16 * T**3 / (3 * tau), "tau << T",
                                              "16 T^3 / (3 tau)"),
    "no_control_segmented": ClosedForm(_no_control, "tau << T",
                                       "16 Omega^2/(w^2+Omega^2) sin^2(sqrt(w^2+Omega^2) tau) T^3/(3 tau)"),
    "no_control_optimal": ClosedForm(lambda rabi, omega, T: 3.86 * rabi**2 / math.hypot(omega, rabi) * T**3,
                                     "tau = 1.16/sqrt(w^2+Omega^2)", "3.86 Omega^2/sqrt(w^2+Omega^2) T^3"),
    "controlled_segmented": ClosedForm(lambda rabi, tau, T: 16 / 3 * rabi**2 * tau * T**3, "tau << T",
                                       "(16/3) Omega^2 tau T^3"),
    "controlled_segmented_sum": ClosedForm(_controlled_sum, "effective 2 Omega delta t sy",
                                           "sum_t 4 Omega^2 ((t+tau)^2 - t^2)^2, exact"),
    "h2_segmented_sum": ClosedForm(_h2_sum, "any delta",
                                   "(Omega^2/delta^4) sum_t [2dt sin 2dt - 2d(t+tau) sin 2d(t+tau) + cos 2dt "
                                   "- cos 2d(t+tau)]^2"),
    "h2_small_delta": ClosedForm(h2_small_delta_fi, "delta tau << 1",
                                 "16 Omega^2 tau (T^3/6 + T cos(4dT)/(16d^2) + (8d^2T^2-1) sin(4dT)/(64d^3))"),
    "h2_small_delta_limit": ClosedForm(lambda rabi, tau, T: 16 / 3 * rabi**2 * tau * T**3, "delta T << 1",
                                       "(16/3) Omega^2 tau T^3"),
    "h2_intermediate": ClosedForm(lambda rabi, tau, T: 16 / 6 * rabi**2 * tau * T**3,
                                  "delta tau << 1 << delta T", "(16/6) Omega^2 tau T^3"),
    "h2_large_delta": ClosedForm(
        lambda rabi, delta, tau, T: 8 * (rabi / delta) ** 2 * T**3 / (3 * tau) * math.sin(delta * tau) ** 2,
        "delta tau not small", "8 (Omega/delta)^2 T^3/(3 tau) sin^2(delta tau)"),
    "h2_large_delta_optimal": ClosedForm(lambda rabi, delta, T: 1.93 * rabi**2 / delta * T**3,
                                         "tau = 1.165/delta", "1.93 Omega^2 T^3 / delta"),
}


def closed_form_fi(formula_id: str, **params) -> FisherResult:
    try:
        form = CLOSED_FORMS[formula_id]
    except KeyError:
        raise InvalidArgument(f"unknown closed form {formula_id!r}") from None
    value = float(form.func(**params))
    return FisherResult(value, "closed_form", dict(params, formula=formula_id), form.regime)


# --- upper bound ---------------------------------------------------------------

_GL_NODES, _GL_WEIGHTS = leggauss(24)


def _spread_of_derivative(hamiltonian, t):
    dx, dy, dz = hamiltonian.frequency_derivative(t)
    return 2 * np.sqrt(dx * dx + dy * dy + dz * dz)


def spread_integral(hamiltonian, T: float, pieces_per_period: int = 4) -> float:
    """Integral over (0, T) of lambda_max - lambda_min of dH/d(frequency).

    Gauss-Legendre on the smooth pieces between corners of the integrand.
    """
    edges = np.concatenate([[0.0], hamiltonian.kinks(0.0, T), [T]])
    freq = abs(getattr(hamiltonian, "frequency", 0.0))
    max_len = T / 8
    if freq > 0:
        max_len = min(max_len, math.pi / (2 * freq * pieces_per_period))
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        n = max(1, int(math.ceil((b - a) / max_len)))
        sub = np.linspace(a, b, n + 1)
        lo, hi = sub[:-1, None], sub[1:, None]
        t = 0.5 * (hi - lo) * _GL_NODES[None, :] + 0.5 * (hi + lo)
        total += float(np.sum(0.5 * (hi - lo) * _GL_WEIGHTS[None, :] * _spread_of_derivative(hamiltonian, t)))
    return total


def qfi_upper_bound(hamiltonian, T: float) -> FisherResult:
    """[integral of (lambda_max - lambda_min)(dH/d omega) dt]^2 over (0, T)."""
    if not T > 0:
        raise InvalidArgument("T must be positive")
    value = spread_integral(hamiltonian, T) ** 2
    return FisherResult(value, "upper_bound", {"T": T})


# --- optimal measurement period --------------------------------------------------

@dataclass(frozen=True)
class OptimalPeriod:
    tau: float
    x: float
    coefficient: float


def _sin2_over_x(x):
    return math.sin(x) ** 2 / x


def optimal_sin2_over_x(tol: float = 1e-12) -> float:
    """Argmax of sin^2(x)/x on (0, pi) (the root of tan x = 2x)."""
    x, _ = golden_section_max(_sin2_over_x, 1e-6, math.pi - 1e-6, tol=tol)
    return x


def optimal_tau_no_control(rabi: float, omega: float) -> OptimalPeriod:
    """Window length maximising the segmented no-control FI.

    Returns tau* = x*/sqrt(w^2+Omega^2) and the coefficient c of
    I_tot = c Omega^2 / sqrt(w^2+Omega^2) T^3, c = 16 sin^2(x*)/(3 x*).
    """
    a = math.hypot(omega, rabi)
    if a == 0:
        raise InvalidArgument("need Omega^2 + omega^2 > 0")
    x = optimal_sin2_over_x()
    return OptimalPeriod(x / a, x, 16 * _sin2_over_x(x) / 3)


def optimal_tau_h2(delta: float) -> OptimalPeriod:
    """Large-detuning H2 optimum: tau* = x*/delta, I_tot = c Omega^2 T^3/delta, c = 8 sin^2(x*)/(3x*)."""
    if delta == 0:
        raise InvalidArgument("delta must be nonzero")
    x = optimal_sin2_over_x()
    return OptimalPeriod(x / abs(delta), x, 8 * _sin2_over_x(x) / 3)
