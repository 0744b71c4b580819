import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from qfi_lab import su2
from qfi_lab.su2 import I2, SX, SY, SZ, InvalidArgument

finite = st.floats(-20, 20, allow_nan=False)


def test_pauli_algebra():
    assert np.allclose(SX @ SY, 1j * SZ)
    for s in su2.PAULI:
        assert np.allclose(s @ s, I2)


def test_pauli_exp_is_half_angle_rotation():
    # a pi pulse about X is -i sx
    assert np.allclose(su2.pauli_exp(su2.X_AXIS, math.pi / 2), -1j * SX)
    assert np.allclose(su2.pauli_exp(su2.Z_AXIS, 0.0), I2)


@given(st.tuples(finite, finite, finite).filter(lambda v: np.linalg.norm(v) > 1e-3), finite)
def test_pauli_exp_matches_scipy(v, angle):
    n = np.array(v) / np.linalg.norm(v)
    ref = expm(-1j * angle * su2.sigma_dot(n))
    assert np.allclose(su2.pauli_exp(n, angle), ref, atol=1e-12)


def test_pauli_exp_rejects_bad_axis():
    with pytest.raises(InvalidArgument):
        su2.pauli_exp((1, 1, 0), 0.3)
    with pytest.raises(InvalidArgument):
        su2.pauli_exp((1, 0, 0), math.inf)


@given(finite, finite, finite, st.floats(0, 3))
def test_expm_batch_matches_scipy(hx, hy, hz, dt):
    out = su2.expm_pauli_batch([hx], [hy], [hz], dt)[0]
    ref = expm(-1j * dt * su2.sigma_dot((hx, hy, hz)))
    assert np.allclose(out, ref, atol=1e-10)


def test_expm_batch_zero_is_identity():
    assert np.allclose(su2.expm_pauli_batch([0.0], [0.0], [0.0], 1.0)[0], I2)


def test_eig_spread_closed_form(rng):
    for _ in range(20):
        a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        H = a + a.conj().T
        lo, hi = su2.eig_spread_hermitian(H)
        ref = np.linalg.eigvalsh(H)
        assert np.allclose([lo, hi], ref)


def test_eig_spread_rejects_non_hermitian():
    with pytest.raises(InvalidArgument):
        su2.eig_spread_hermitian(np.array([[0, 1], [0, 0]]))


def test_phase_invariant_distance_ignores_global_phase():
    U = su2.pauli_exp((0, 0.6, 0.8), 0.7)
    assert su2.phase_invariant_distance(U, np.exp(1.3j) * U) < 1e-14
    assert su2.phase_invariant_distance(U, I2) > 0.1


def test_ordered_product_order_and_empty(rng):
    Us = [su2.pauli_exp(su2.unit_axis(v / np.linalg.norm(v)), a)
          for v, a in zip(rng.normal(size=(7, 3)), rng.uniform(0, 3, 7))]
    ref = I2
    for U in Us:
        ref = U @ ref
    assert np.allclose(su2.ordered_product(np.array(Us)), ref)
    assert np.allclose(su2.ordered_product(np.empty((0, 2, 2))), I2)


def test_prefix_products(rng):
    Us = np.array([su2.pauli_exp(v / np.linalg.norm(v), a)
                   for v, a in zip(rng.normal(size=(13, 3)), rng.uniform(0, 3, 13))])
    P = su2.prefix_products(Us)
    for k in range(len(Us)):
        assert np.allclose(P[k], su2.ordered_product(Us[: k + 1]))


def test_states():
    assert np.allclose(SX @ su2.UP_X, su2.UP_X)
    assert np.allclose(SX @ su2.DOWN_X, -su2.DOWN_X)
    psi = su2.bloch_state(1.0, 0.4)
    assert abs(np.vdot(psi, su2.orthogonal_state(psi))) < 1e-15
    with pytest.raises(InvalidArgument):
        su2.normalized([0, 0])


@settings(max_examples=50)
@given(st.lists(st.tuples(finite, finite, finite, st.floats(0, 2)), min_size=1, max_size=30))
def test_products_stay_unitary(params):
    Us = np.array([su2.expm_pauli_batch([a], [b], [c], d)[0] for a, b, c, d in params])
    assert su2.is_unitary(su2.ordered_product(Us), tol=1e-12)
