"""Two-qubit correlation measures for single-excitation states.

Basis order is {|ee>, |eg>, |ge>, |gg>} with sigma_z |e> = +|e>.
Closed forms take populations P1 = |alpha1|^2, P2 = |alpha2|^2 and accept
numpy arrays; the general routines work on any 4x4 density matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TSIRELSON = 2.0 * math.sqrt(2.0)
_DOMAIN_TOL = 1e-10
_CLAMP_TOL = 1e-12
_PSD_TOL = 1e-12

PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)
_PAULI_PAIRS = np.array([[np.kron(si, sj) for sj in PAULI] for si in PAULI])


@dataclass(frozen=True)
class ReducedDensityMatrix:
    matrix: np.ndarray
    P1: float
    P2: float
    phi: float

    @property
    def P_bath(self) -> float:
        return 1.0 - self.P1 - self.P2


def reduced_density(alpha1: complex, alpha2: complex) -> ReducedDensityMatrix:
    """Two-qubit state left after tracing out the photons."""
    P1 = abs(alpha1) ** 2
    P2 = abs(alpha2) ** 2
    if P1 + P2 > 1.0 + _DOMAIN_TOL:
        raise ValueError(f"|alpha1|^2 + |alpha2|^2 = {P1 + P2!r} exceeds 1")
    rho = np.zeros((4, 4), dtype=complex)
    rho[1, 1] = P1
    rho[2, 2] = P2
    rho[1, 2] = alpha1 * np.conj(alpha2)
    rho[2, 1] = alpha2 * np.conj(alpha1)
    rho[3, 3] = max(0.0, 1.0 - P1 - P2)
    phi = float(np.angle(alpha2 * np.conj(alpha1)))
    return ReducedDensityMatrix(matrix=rho, P1=P1, P2=P2, phi=phi)


def _as_matrix(rho) -> np.ndarray:
    m = rho.matrix if isinstance(rho, ReducedDensityMatrix) else np.asarray(rho, dtype=complex)
    if m.shape != (4, 4):
        raise ValueError(f"expected a 4x4 density matrix, got shape {m.shape}")
    return m


def _check_populations(P1, P2):
    P1 = np.asarray(P1, dtype=float)
    P2 = np.asarray(P2, dtype=float)
    if np.any(P1 < -_DOMAIN_TOL) or np.any(P2 < -_DOMAIN_TOL) or np.any(P1 + P2 > 1.0 + _DOMAIN_TOL):
        raise ValueError("populations must satisfy P1, P2 >= 0 and P1 + P2 <= 1")
    return np.clip(P1, 0.0, 1.0), np.clip(P2, 0.0, 1.0)


def _scalar_or_array(x):
    return float(x) if np.ndim(x) == 0 else x


def chsh_closed(P1, P2):
    """Maximal CHSH value 2 sqrt(u1 + max(u1, u3)), u1 = 4 P1 P2, u3 = (1 - 2P1 - 2P2)^2."""
    P1, P2 = _check_populations(P1, P2)
    u1 = 4.0 * P1 * P2
    u3 = (1.0 - 2.0 * P1 - 2.0 * P2) ** 2
    return _scalar_or_array(2.0 * np.sqrt(u1 + np.maximum(u1, u3)))


def correlation_matrix(rho) -> np.ndarray:
    """T_ij = Tr[rho sigma_i (x) sigma_j]."""
    m = _as_matrix(rho)
    return np.einsum("ijab,ba->ij", _PAULI_PAIRS, m).real


def symmetric_eigvals3(U: np.ndarray) -> np.ndarray:
    """Eigenvalues of a real symmetric 3x3 matrix, descending.

    Trigonometric solution of the characteristic cubic; falls back to
    LAPACK when the matrix is not (numerically) symmetric or two roots
    nearly coincide.
    """
    U = np.asarray(U, dtype=float)
    if U.shape != (3, 3) or not np.allclose(U, U.T, rtol=0, atol=1e-13 * max(1.0, np.abs(U).max())):
        return np.sort(np.linalg.eigvalsh(0.5 * (U + U.T)))[::-1]
    p1 = U[0, 1] ** 2 + U[0, 2] ** 2 + U[1, 2] ** 2
    q = np.trace(U) / 3.0
    if p1 == 0.0:
        return np.sort(np.diag(U))[::-1]
    p2 = (U[0, 0] - q) ** 2 + (U[1, 1] - q) ** 2 + (U[2, 2] - q) ** 2 + 2.0 * p1
    p = math.sqrt(p2 / 6.0)
    if p == 0.0:
        return np.full(3, q)
    Bm = (U - q * np.eye(3)) / p
    r = np.clip(np.linalg.det(Bm) / 2.0, -1.0, 1.0)
    if 1.0 - abs(r) < 1e-6:
        # acos loses half the digits next to a repeated root
        return np.sort(np.linalg.eigvalsh(U))[::-1]
    theta = math.acos(r) / 3.0
    e1 = q + 2.0 * p * math.cos(theta)
    e3 = q + 2.0 * p * math.cos(theta + 2.0 * math.pi / 3.0)
    e2 = 3.0 * q - e1 - e3
    return np.sort(np.array([e1, e2, e3]))[::-1]


def _check_density(m: np.ndarray):
    if not np.allclose(m, m.conj().T, atol=1e-12):
        raise ValueError("density matrix is not Hermitian")
    evals = np.linalg.eigvalsh(m)
    if evals.min() < -_PSD_TOL * max(1.0, abs(np.trace(m).real)):
        raise ValueError(f"density matrix is not positive semidefinite (min eigenvalue {evals.min():.3g})")


def chsh_horodecki(rho) -> float:
    """Horodecki maximal CHSH value 2 sqrt(u1 + u2) for any two-qubit state."""
    m = _as_matrix(rho)
    _check_density(m)
    T = correlation_matrix(m)
    u = symmetric_eigvals3(T.T @ T)
    return 2.0 * math.sqrt(max(0.0, u[0] + u[1]))


def binary_entropy(x):
    """h(x) in bits with h(0) = h(1) = 0."""
    x = np.asarray(x, dtype=float)
    if np.any(x < -_CLAMP_TOL) or np.any(x > 1.0 + _CLAMP_TOL):
        raise ValueError("binary entropy argument outside [0, 1]")
    x = np.clip(x, 0.0, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -x * np.log2(x) - (1.0 - x) * np.log2(1.0 - x)
    h = np.where((x == 0.0) | (x == 1.0), 0.0, h)
    return _scalar_or_array(h)


def qmi(P1, P2):
    """Quantum mutual information h(P1) + h(P2) - h(P1 + P2), in bits."""
    P1, P2 = _check_populations(P1, P2)
    total = np.clip(P1 + P2, 0.0, 1.0)
    out = binary_entropy(P1) + binary_entropy(P2) - binary_entropy(total)
    return _scalar_or_array(np.maximum(out, 0.0))


def von_neumann_entropy(m: np.ndarray) -> float:
    evals = np.clip(np.linalg.eigvalsh(m), 0.0, None)
    evals = evals[evals > 0]
    return float(-np.sum(evals * np.log2(evals)))


def qmi_general(rho) -> float:
    """Mutual information from the partial traces of any 4x4 state."""
    m = _as_matrix(rho)
    r = m.reshape(2, 2, 2, 2)
    rho_a = np.einsum("ijkj->ik", r)
    rho_b = np.einsum("ijil->jl", r)
    return von_neumann_entropy(rho_a) + von_neumann_entropy(rho_b) - von_neumann_entropy(m)


def trace_distance(rho1, rho2) -> float:
    """Half the trace norm of rho1 - rho2."""
    m1 = np.asarray(rho1.matrix if isinstance(rho1, ReducedDensityMatrix) else rho1, dtype=complex)
    m2 = np.asarray(rho2.matrix if isinstance(rho2, ReducedDensityMatrix) else rho2, dtype=complex)
    if m1.shape != m2.shape:
        raise ValueError(f"dimension mismatch: {m1.shape} vs {m2.shape}")
    diff = m1 - m2
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(0.5 * (diff + diff.conj().T)))))


def trace_distance_closed(s, a):
    """2 |s| |a|: trace distance of the pair evolved from |eg> and |ge>.

    Valid when the second state is the qubit-swap image (s, -a) of the first.
    """
    if np.any(np.abs(s) ** 2 + np.abs(a) ** 2 > 1.0 + _DOMAIN_TOL):
        raise ValueError("|s|^2 + |a|^2 exceeds 1")
    return _scalar_or_array(2.0 * np.abs(s) * np.abs(a))


def trace_distance_single_excitation(alpha1, alpha2, beta1, beta2):
    """Trace distance between two single-excitation reduced states, vectorized.

    (alpha1, alpha2) and (beta1, beta2) are the qubit amplitudes of the two
    states.  The difference matrix is block diagonal: a 2x2 block on
    {|eg>, |ge>} and a scalar on |gg>.
    """
    alpha1, alpha2, beta1, beta2 = (np.asarray(x, dtype=complex) for x in (alpha1, alpha2, beta1, beta2))
    d1 = np.abs(alpha1) ** 2 - np.abs(beta1) ** 2
    d2 = np.abs(alpha2) ** 2 - np.abs(beta2) ** 2
    off = alpha1 * np.conj(alpha2) - beta1 * np.conj(beta2)
    mean = 0.5 * (d1 + d2)
    radius = np.sqrt((0.5 * (d1 - d2)) ** 2 + np.abs(off) ** 2)
    out = 0.5 * (np.abs(mean + radius) + np.abs(mean - radius) + np.abs(d1 + d2))
    return _scalar_or_array(out)
