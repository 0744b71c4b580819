"""Exact 2x2 complex algebra for single-qubit evolution.

Matrices are plain ``numpy`` arrays of shape ``(2, 2)`` (or ``(n, 2, 2)`` for
batches); states are arrays of shape ``(2,)``.  The sign convention for Pauli
exponentials is

    pauli_exp(n, a) = exp(-i a n.sigma) = cos(a) 1 - i sin(a) n.sigma

so a Bloch-sphere rotation by ``2a`` about ``n``.
"""

from __future__ import annotations

import numpy as np

TOL_UNITARY = 1e-12
TOL_HERMITIAN = 1e-10
TOL_STATE = 1e-12

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = (SX, SY, SZ)

X_AXIS = (1.0, 0.0, 0.0)
Y_AXIS = (0.0, 1.0, 0.0)
Z_AXIS = (0.0, 0.0, 1.0)

# sigma_X eigenstates: |up_x> = (|0> + |1>)/sqrt2, |down_x> = (|0> - |1>)/sqrt2
UP_X = np.array([1.0, 1.0], dtype=complex) / np.sqrt(2.0)
DOWN_X = np.array([1.0, -1.0], dtype=complex) / np.sqrt(2.0)
UP_Z = np.array([1.0, 0.0], dtype=complex)
DOWN_Z = np.array([0.0, 1.0], dtype=complex)


class InvalidArgument(ValueError):
    """Raised when an input violates a documented precondition."""


def unit_axis(axis, tol: float = TOL_UNITARY) -> np.ndarray:
    """Validate a rotation axis and return it as a float array."""
    n = np.asarray(axis, dtype=float)
    if n.shape != (3,) or not np.all(np.isfinite(n)):
        raise InvalidArgument(f"axis must be three finite numbers, got {axis!r}")
    if abs(np.linalg.norm(n) - 1.0) > tol:
        raise InvalidArgument(f"axis must be a unit vector, |n| = {np.linalg.norm(n)!r}")
    return n


def sigma_dot(n) -> np.ndarray:
    """Return n.sigma for a real 3-vector ``n`` (not required to be unit)."""
    nx, ny, nz = n
    return np.array([[nz, nx - 1j * ny], [nx + 1j * ny, -nz]], dtype=complex)


def pauli_exp(axis, angle: float) -> np.ndarray:
    """Closed form of exp(-i * angle * (n.sigma)) for a unit axis ``n``."""
    n = unit_axis(axis)
    if not np.isfinite(angle):
        raise InvalidArgument(f"angle must be finite, got {angle!r}")
    return np.cos(angle) * I2 - 1j * np.sin(angle) * sigma_dot(n)


def expm_pauli_batch(hx, hy, hz, dt) -> np.ndarray:
    """Batched exp(-i dt (hx sx + hy sy + hz sz)) for coefficient arrays.

    Returns an array of shape ``(n, 2, 2)``.  Zero-norm entries give the
    identity.
    """
    hx, hy, hz = (np.asarray(c, dtype=float) for c in (hx, hy, hz))
    hx, hy, hz, dt = np.broadcast_arrays(hx, hy, hz, np.asarray(dt, dtype=float))
    r = np.sqrt(hx * hx + hy * hy + hz * hz)
    c = np.cos(r * dt)
    safe = np.where(r > 0, r, 1.0)
    s = np.where(r > 0, np.sin(r * dt) / safe, dt)  # sin(r dt)/r
    out = np.empty(r.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = c - 1j * s * hz
    out[..., 1, 1] = c + 1j * s * hz
    out[..., 0, 1] = -1j * s * (hx - 1j * hy)
    out[..., 1, 0] = -1j * s * (hx + 1j * hy)
    return out


def pauli_components(H) -> tuple[float, float, float, float]:
    """Decompose a 2x2 matrix as h0*1 + hx*sx + hy*sy + hz*sz (complex coefficients)."""
    H = np.asarray(H, dtype=complex)
    h0 = 0.5 * (H[0, 0] + H[1, 1])
    hz = 0.5 * (H[0, 0] - H[1, 1])
    hx = 0.5 * (H[0, 1] + H[1, 0])
    hy = 0.5j * (H[0, 1] - H[1, 0])
    return h0, hx, hy, hz


def is_hermitian(H, tol: float = TOL_HERMITIAN) -> bool:
    H = np.asarray(H)
    return bool(np.max(np.abs(H - H.conj().T)) < tol)


def is_unitary(U, tol: float = TOL_UNITARY) -> bool:
    U = np.asarray(U)
    if not np.all(np.isfinite(U)):
        return False
    gram = U.conj().T @ U
    return bool(np.max(np.abs(gram - I2)) <= tol and abs(abs(np.linalg.det(U)) - 1.0) <= tol)


def eig_spread_hermitian(H) -> tuple[float, float]:
    """Eigenvalues (lambda_min, lambda_max) of a 2x2 Hermitian matrix.

    Uses the closed form h0 -/+ |(hx, hy, hz)|.
    """
    H = np.asarray(H, dtype=complex)
    if H.shape != (2, 2):
        raise InvalidArgument(f"expected a 2x2 matrix, got shape {H.shape}")
    if not is_hermitian(H):
        raise InvalidArgument("matrix is not Hermitian to within TOL_HERMITIAN")
    h0, hx, hy, hz = (c.real for c in pauli_components(H))
    r = float(np.sqrt(hx * hx + hy * hy + hz * hz))
    return h0 - r, h0 + r


def dagger(U) -> np.ndarray:
    return np.asarray(U).conj().T


def compose(A, B) -> np.ndarray:
    """Matrix product A @ B (B acts first)."""
    return np.asarray(A) @ np.asarray(B)


def apply(U, psi) -> np.ndarray:
    """Apply ``U`` to a state and renormalise away rounding drift."""
    out = np.asarray(U) @ np.asarray(psi, dtype=complex)
    return out / np.linalg.norm(out)


def normalized(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    norm = np.linalg.norm(psi)
    if psi.shape != (2,) or not np.isfinite(norm) or norm == 0:
        raise InvalidArgument("state must be a nonzero 2-vector")
    return psi / norm


def bloch_state(theta: float, phi: float) -> np.ndarray:
    """Pure state with Bloch polar angle ``theta`` and azimuth ``phi``."""
    return np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)], dtype=complex)


def orthogonal_state(psi) -> np.ndarray:
    a, b = normalized(psi)
    return np.array([-np.conj(b), np.conj(a)], dtype=complex)


def phase_invariant_distance(U, V) -> float:
    """min over theta of ||U - exp(i theta) V|| (Frobenius)."""
    U = np.asarray(U, dtype=complex)
    V = np.asarray(V, dtype=complex)
    overlap = np.vdot(V, U)  # tr(V^dagger U)
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    return float(np.linalg.norm(U - phase * V))


def mul_batch(A, B) -> np.ndarray:
    """Entrywise 2x2 products ``A[k] @ B[k]`` written out for speed."""
    out = np.empty(np.broadcast_shapes(A.shape, B.shape), dtype=complex)
    a00, a01, a10, a11 = A[..., 0, 0], A[..., 0, 1], A[..., 1, 0], A[..., 1, 1]
    b00, b01, b10, b11 = B[..., 0, 0], B[..., 0, 1], B[..., 1, 0], B[..., 1, 1]
    out[..., 0, 0] = a00 * b00 + a01 * b10
    out[..., 0, 1] = a00 * b01 + a01 * b11
    out[..., 1, 0] = a10 * b00 + a11 * b10
    out[..., 1, 1] = a10 * b01 + a11 * b11
    return out


def ordered_product(Us) -> np.ndarray:
    """Time-ordered product ``Us[-1] @ ... @ Us[1] @ Us[0]``.

    Pairwise tree reduction, so rounding error grows like log(n) rather
    than n.  An empty sequence gives the identity.
    """
    Us = np.asarray(Us, dtype=complex)
    if Us.ndim == 2:
        return Us.copy()
    if len(Us) == 0:
        return I2.copy()
    while len(Us) > 1:
        tail = Us[-1:] if len(Us) % 2 else None
        even = len(Us) - (1 if tail is not None else 0)
        Us_next = mul_batch(Us[1:even:2], Us[0:even:2])
        Us = Us_next if tail is None else np.concatenate([Us_next, tail])
    return Us[0]


def prefix_products(Us) -> np.ndarray:
    """All partial products ``P[k] = Us[k] @ ... @ Us[0]``, shape (n, 2, 2).

    Hillis-Steele scan: log2(n) batched multiplications.
    """
    P = np.array(Us, dtype=complex)
    offset = 1
    while offset < len(P):
        P[offset:] = mul_batch(P[offset:], P[:-offset])
        offset *= 2
    return P
