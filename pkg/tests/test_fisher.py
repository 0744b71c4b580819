import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.optimize import brentq

from qfi_lab import fisher, su2
from qfi_lab.dynamics import HamiltonianSpec, Kind, analytic_slot_unitary
from qfi_lab.fisher import (
    SINGULAR,
    FIMatrix2,
    FisherResult,
    NumericalDerivativeError,
    SegmentationPlan,
    classical_fi,
    closed_form_fi,
    crb_variance,
    fi_matrix_2,
    qfi_generator,
    qfi_max,
    qfi_state,
    qfi_upper_bound,
)
from qfi_lab.su2 import InvalidArgument


def random_state(rng):
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    return v / np.linalg.norm(v)


def test_static_field_generator():
    t = 3.0
    G = qfi_generator(lambda w: su2.pauli_exp(su2.Z_AXIS, w * t), 0.4)
    assert np.allclose(G, t * su2.SZ, atol=1e-8)
    assert qfi_max(G).value == pytest.approx(4 * t * t, rel=1e-8)
    assert qfi_state(G, su2.UP_X).value == pytest.approx(4 * t * t, rel=1e-8)
    assert qfi_state(G, su2.UP_Z).value == pytest.approx(0.0, abs=1e-12)


def test_max_qfi_dominates_random_states(rng):
    U = lambda d: analytic_slot_unitary(d, 1.0, 0.0, 4.0, 0.3)  # noqa: E731
    G = qfi_generator(U, 0.05)
    best = max(qfi_state(G, random_state(rng)).value for _ in range(3000))
    top = qfi_max(G).value
    assert best <= top * (1 + 1e-12)
    assert best > 0.99 * top


def test_generator_rejects_non_unitary_family():
    with pytest.raises(NumericalDerivativeError):
        qfi_generator(lambda a: np.array([[1 + a, 0], [0, 1]], dtype=complex), 0.3)


@settings(max_examples=40)
@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3), st.floats(0, 2 * math.pi), st.floats(0, math.pi))
def test_state_qfi_never_exceeds_max(a, b, c, phi, theta):
    G = su2.sigma_dot((a, b, c))
    assert qfi_state(G, su2.bloch_state(theta, phi)).value <= qfi_max(G).value + 1e-9


def test_classical_fi_matches_analytic():
    # P = sin^2(t x): FI = 4 t^2 everywhere away from the edges
    for x in (0.1, 0.37, 1.2):
        assert classical_fi(lambda p: math.sin(2.5 * p) ** 2, x).value == pytest.approx(4 * 6.25, rel=1e-8)


def test_classical_fi_edge_fallback():
    res = classical_fi(lambda p: math.sin(2.5 * p) ** 2, 0.0)
    assert res.flagged
    assert res.value == pytest.approx(4 * 6.25, rel=1e-6)


def test_classical_fi_trace():
    t = np.array([0.0, 1.0, 2.0])
    vals, flagged = fisher.classical_fi_trace(lambda p: np.sin(t * p) ** 2, 0.0)
    assert list(flagged) == [True, True, True]
    assert np.allclose(vals, 4 * t**2, rtol=1e-6)
    vals, flagged = fisher.classical_fi_trace(lambda p: np.sin(t * p) ** 2, 0.3)
    assert np.allclose(vals[1:], 4 * t[1:] ** 2, rtol=1e-7)


def test_classical_fi_rejects_bad_probability():
    with pytest.raises(InvalidArgument):
        classical_fi(lambda p: 1.5, 0.0)


def test_state_trace_qfi():
    t = np.array([1.0, 2.0])
    states = lambda w: np.stack([su2.pauli_exp(su2.Z_AXIS, w * s) @ su2.UP_X for s in t])  # noqa: E731
    assert np.allclose(fisher.qfi_state_trace(states, 0.2), 4 * t**2, rtol=1e-8)


def test_central_difference_accuracy():
    d = fisher.central_difference(math.exp, 1.0)
    assert d == pytest.approx(math.e, rel=1e-10)
    assert fisher.second_difference(math.sin, 0.5, 1e-3) == pytest.approx(-math.sin(0.5), rel=1e-8)


def test_fisher_result_validation():
    with pytest.raises(InvalidArgument):
        FisherResult(-1.0, "numeric_qfi")
    with pytest.raises(InvalidArgument):
        FisherResult(1.0, "guess")


def test_fi_matrix_algebra_and_checks():
    A = FIMatrix2(np.array([[2.0, 1.0], [1.0, 3.0]]))
    B = sum([A, A])
    assert np.allclose(B.matrix, 2 * A.matrix)
    assert np.allclose((0.5 * A).matrix, [[1, 0.5], [0.5, 1.5]])
    assert crb_variance(A) == pytest.approx(3 / 5)
    assert crb_variance(A, "phi") == pytest.approx(2 / 5)
    assert fisher.effective_fi(A) == pytest.approx(5 / 3)
    with pytest.raises(InvalidArgument):
        FIMatrix2(np.array([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(InvalidArgument):
        FIMatrix2(np.array([[1.0, 0.0], [0.0, -1.0]]))
    with pytest.raises(ValueError):
        A.matrix[0, 0] = 5


def test_single_outcome_matrix_is_singular():
    M = fi_matrix_2(lambda d, phi: math.sin(3 * d + 2 * phi + 0.4) ** 2, (0.1, 0.2))
    assert M.eigenvalue_ratio < 1e-10
    assert crb_variance(M) is SINGULAR
    assert not SINGULAR and float(SINGULAR) == math.inf
    assert fisher.effective_fi(M) == 0.0
    # two independent measurements restore invertibility
    N = M + fi_matrix_2(lambda d, phi: math.sin(1 * d + 2 * phi + 0.4) ** 2, (0.1, 0.2))
    assert crb_variance(N) is not SINGULAR


def test_edge_matrix_is_psd():
    M = fi_matrix_2(lambda d, phi: math.sin(3 * d + 2 * phi) ** 2, (0.0, 0.0))
    assert M.flagged
    assert np.allclose(M.matrix, 4 * np.outer([3, 2], [3, 2]), rtol=1e-4)


def test_window_lengths():
    plan = SegmentationPlan(0.3, 3.0)
    assert plan.windows == 10
    assert np.allclose(plan.starts, 0.3 * np.arange(10))
    with pytest.raises(InvalidArgument):
        SegmentationPlan(2.0, 1.0)


def test_cancellation_free_helper_is_continuous():
    t = 2.0
    deltas = np.array([2.49e-3, 2.51e-3])  # straddles the series cutoff |2 delta t| = 1e-2
    g = fisher._g_over_delta_sq(deltas, t)
    assert abs(g[1] - g[0]) / g[0] < 1e-5
    exact = [float((math.cos(2 * d * t) - 1 + 2 * d * t * math.sin(2 * d * t)) / d**2) for d in deltas]
    assert np.allclose(g, exact, rtol=1e-8)


def test_method1_fi_limits():
    t = np.array([0.5, 2.0, 5.0])
    assert np.allclose(fisher.method1_fi(1.0, 1e-9, t), 4 * t**4, rtol=1e-9)
    d, t = 0.5, 200.0
    lt = closed_form_fi("method1_long_time", rabi=1.0, delta=d, t=t).value
    assert fisher.method1_fi(1.0, d, t) == pytest.approx(lt, rel=0.02)


def test_h2_small_delta_formula_against_quadrature():
    rabi, tau = 1.0, 0.1
    for delta, T in [(0.01, 5.0), (0.01, 500.0), (0.3, 40.0)]:
        ref = 16 * rabi**2 * tau * quad(lambda t: t * t * math.cos(2 * delta * t) ** 2, 0, T, limit=800)[0]
        assert fisher.h2_small_delta_fi(rabi, delta, tau, T) == pytest.approx(ref, rel=1e-9)
        # the literal closed form (subject to cancellation) agrees where it is well conditioned
        lit = 16 * rabi**2 * tau * (T**3 / 6 + T * math.cos(4 * delta * T) / (16 * delta**2)
                                    + (8 * delta**2 * T**2 - 1) * math.sin(4 * delta * T) / (64 * delta**3))
        assert fisher.h2_small_delta_fi(rabi, delta, tau, T) == pytest.approx(lit, rel=1e-6)


def test_h2_window_sum_matches_small_delta_integral():
    rabi, delta, tau, T = 1.0, 0.01, 0.01, 100.0
    s = closed_form_fi("h2_segmented_sum", rabi=rabi, delta=delta, tau=tau, T=T).value
    assert s == pytest.approx(fisher.h2_small_delta_fi(rabi, delta, tau, T), rel=1e-3)


def test_upper_bound_h1_is_exact():
    for w in (0.0, 0.3, 7.0):
        assert qfi_upper_bound(HamiltonianSpec(Kind.H1, 1.3, w), 2.0).value == pytest.approx(
            4 * 1.3**2 * 16, rel=1e-12)


def test_upper_bound_h2_against_quadrature():
    rabi, w, T = 1.0, 3.0, 20.0
    pts = [(k + 0.5) * math.pi / (2 * w) for k in range(int(2 * w * T / math.pi) + 1)]
    ref = quad(lambda t: 4 * rabi * t * abs(math.cos(2 * w * t)), 0, T, points=pts, limit=500)[0] ** 2
    assert qfi_upper_bound(HamiltonianSpec(Kind.H2, rabi, w), T).value == pytest.approx(ref, rel=1e-10)


def test_upper_bound_bounds_numeric_qfi():
    h = HamiltonianSpec(Kind.H1, 1.0, 0.2, 0.5)
    top = qfi_max(qfi_generator(lambda d: analytic_slot_unitary(d, 1.0, 0.0, 6.0, 0.5), 0.2)).value
    assert top <= qfi_upper_bound(h, 6.0).value * (1 + 1e-9)


def test_optimal_period_matches_root_of_tan():
    x_ref = brentq(lambda x: math.tan(x) - 2 * x, 1.0, 1.5)
    res = fisher.optimal_tau_no_control(1.0, 0.0)
    assert res.x == pytest.approx(x_ref, abs=1e-7)
    assert res.coefficient == pytest.approx(16 * math.sin(x_ref) ** 2 / (3 * x_ref), rel=1e-12)
    res = fisher.optimal_tau_no_control(3.0, 4.0)
    assert res.tau == pytest.approx(x_ref / 5.0, abs=1e-7)
    h2 = fisher.optimal_tau_h2(2.0)
    assert h2.tau == pytest.approx(x_ref / 2.0, abs=1e-7)
    assert h2.coefficient == pytest.approx(res.coefficient / 2)


def test_segmented_no_control_sum_matches_formula():
    rabi, omega, tau = 1.0, 0.3, 0.2
    T = 100 * tau

    def window(start):
        return qfi_max(qfi_generator(lambda w: analytic_slot_unitary(w, rabi, start, tau), omega)).value

    total = fisher.segmented_total_fi(window, SegmentationPlan(tau, T)).value
    ref = closed_form_fi("no_control_segmented", rabi=rabi, omega=omega, tau=tau, T=T).value
    assert total == pytest.approx(ref, rel=0.01)


def test_exact_finite_sums():
    tau, T = 0.5, 5.0
    direct = sum(4 * (2 * s + tau) ** 2 for s in tau * np.arange(10))
    assert closed_form_fi("ramsey_segmented_sum", tau=tau, T=T).value == pytest.approx(direct)
    direct = sum(4 * ((s + tau) ** 2 - s**2) ** 2 for s in tau * np.arange(10))
    assert closed_form_fi("controlled_segmented_sum", rabi=1.0, tau=tau, T=T).value == pytest.approx(direct)


def test_unknown_closed_form():
    with pytest.raises(InvalidArgument):
        closed_form_fi("nope")
