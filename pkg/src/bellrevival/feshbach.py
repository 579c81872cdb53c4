"""Pseudomode elimination and the near-node dark-state decay law.

Splitting M into qubit block A, pseudomode block D = -lambda_tilde I and the
couplings B, C gives

    det(M - z) = det(zI - D) * det(zI - A + Sigma(z, phi)),
    Sigma(z, phi) = g^2 / (z + lam - i omega0) * [[2cos^2, i sin2phi], [-i sin2phi, 2sin^2]],

so the qubit-space problem is governed by A - Sigma(z).  The dark branch near
phi0 = pi (antisymmetric channel decoupled) is reached by evaluating Sigma on
shell at z0 = -i(omega0 - J).  All z here are in the lab frame.
"""

from __future__ import annotations

import warnings

import numpy as np
from numpy.polynomial import polynomial as npoly

from .model import PhysicalParams
from .pseudomode import geometry_trig

POLE_TOL = 1e-12
EPS_MAX = 0.5
EPS_WARN = 0.3


def qubit_block(params: PhysicalParams) -> np.ndarray:
    w0, J = params.omega0, params.J
    return np.diag([-1j * (w0 + J), -1j * (w0 - J)])


def coupling_kernel(phi) -> np.ndarray:
    c2, s2, sn = geometry_trig(phi)
    return np.array([[2 * c2, 1j * sn], [-1j * sn, 2 * s2]], dtype=complex)


def _kernel_from_trig(c2, s2, sn) -> np.ndarray:
    return np.array([[2 * c2, 1j * sn], [-1j * sn, 2 * s2]], dtype=complex)


def feshbach_self_energy(z: complex, phi: float, params: PhysicalParams) -> np.ndarray:
    w = z + params.lam - 1j * params.omega0
    if abs(w) < POLE_TOL * params.omega0:
        raise ValueError(f"z = {z!r} sits on the pseudomode pole -lambda_tilde")
    return params.g**2 / w * coupling_kernel(phi)


def feshbach_determinant(z: complex, phi: float, params: PhysicalParams) -> complex:
    """det(zI - A + Sigma(z)) * det(zI - D); equals det(M - zI) exactly."""
    A = qubit_block(params)
    w = z + params.lam - 1j * params.omega0
    return np.linalg.det(z * np.eye(2) - A + feshbach_self_energy(z, phi, params)) * w * w


def _quartic(params: PhysicalParams, K: np.ndarray, sign: float = 1.0):
    """Coefficients (ascending, rotating-frame variable zeta = z + i omega0) of
    det(w (zI - A) + sign g^2 K) with w = z + lam - i omega0."""
    w0, J, g2 = params.omega0, params.J, params.g**2
    w = np.array([params.lam - 2j * w0, 1.0])  # zeta + lam - 2 i omega0
    d1 = np.array([1j * J, 1.0])  # zeta + i J
    d2 = np.array([-1j * J, 1.0])  # zeta - i J
    e11 = npoly.polyadd(npoly.polymul(w, d1), [sign * g2 * K[0, 0]])
    e22 = npoly.polyadd(npoly.polymul(w, d2), [sign * g2 * K[1, 1]])
    return npoly.polysub(npoly.polymul(e11, e22), [g2 * g2 * K[0, 1] * K[1, 0]])


def feshbach_roots(phi: float, params: PhysicalParams, sign: float = 1.0) -> np.ndarray:
    """Zeros of det(zI - A + Sigma(z)) det(zI - D), lab frame, sorted by decay rate.

    The D-block roots z = -lambda_tilde cancel against the poles of Sigma, so
    clearing denominators leaves a quartic whose four roots are the
    eigenvalues of M.  ``sign=-1`` flips the sign in front of Sigma, which
    breaks the identity; it is kept for the comparison tests.
    """
    roots = npoly.polyroots(_quartic(params, coupling_kernel(phi), sign)) - 1j * params.omega0
    return roots[np.argsort(-roots.real, kind="stable")]


def static_schur_roots(phi: float, params: PhysicalParams) -> np.ndarray:
    """The z = 0 shortcut: eigenvalues of A - Sigma(0) plus the D-block roots."""
    Meff = qubit_block(params) - feshbach_self_energy(0.0, phi, params)
    lt = params.lambda_tilde
    roots = np.concatenate([np.linalg.eigvals(Meff), [-lt, -lt]])
    return roots[np.argsort(-roots.real, kind="stable")]


def expanded_trig(eps: float):
    """(cos^2, sin^2, sin 2phi) at phi = pi + eps to fourth order in eps."""
    e2 = eps * eps
    return 1.0 - e2 + e2 * e2 / 3.0, e2 - e2 * e2 / 3.0, 2.0 * eps - 4.0 * eps * e2 / 3.0


def node_eigenvalue(params: PhysicalParams) -> complex:
    return -1j * (params.omega0 - params.J)


def effective_matrix(eps: float, params: PhysicalParams, z: complex | None = None) -> np.ndarray:
    """M_eff(eps) = A - Sigma(z, pi + eps) with quartic trig expansions; z defaults to z0."""
    if not abs(eps) < EPS_MAX:
        raise ValueError(f"|eps| must be below {EPS_MAX}, got {eps!r}")
    z = node_eigenvalue(params) if z is None else z
    w = z + params.lam - 1j * params.omega0
    if abs(w) < POLE_TOL * params.omega0:
        raise ValueError(f"z = {z!r} sits on the pseudomode pole -lambda_tilde")
    K = _kernel_from_trig(*expanded_trig(eps))
    return qubit_block(params) - params.g**2 / w * K


def dark_branch_eigenvalue(Meff: np.ndarray, params: PhysicalParams) -> complex:
    """Eigenvalue of M_eff continuously connected to z0."""
    mu = np.linalg.eigvals(Meff)
    return complex(mu[np.argmin(np.abs(mu - node_eigenvalue(params)))])


def lambda0_prefactor(params: PhysicalParams) -> float:
    """Lambda0 = 2 g^2 J^2 lam / (J^2 lam^2 + (g^2 + 2 J omega0 - J^2)^2)."""
    g2, J, lam, w0 = params.g**2, params.J, params.lam, params.omega0
    denom = J * J * lam * lam + (g2 + 2.0 * J * w0 - J * J) ** 2
    if denom == 0.0:
        raise ValueError("Lambda0 denominator vanishes at these parameters")
    return 2.0 * g2 * J * J * lam / denom


def gamma_df_analytic(eps: float, params: PhysicalParams) -> float:
    """Leading-order dark decay rate Lambda0 * eps^2, eps = k0 * delta_d."""
    if abs(eps) > EPS_WARN:
        warnings.warn(f"|eps| = {abs(eps):.3g} is outside the quadratic regime", RuntimeWarning, stacklevel=2)
    return lambda0_prefactor(params) * eps * eps


def strong_coupling_rate(eps: float, params: PhysicalParams) -> float:
    """2 (J/g)^2 lam eps^2, the g >> |J|, lam limit of the analytic law."""
    return 2.0 * (params.J / params.g) ** 2 * params.lam * eps * eps


def exact_minus_quartic_check(phi: float, params: PhysicalParams) -> float:
    """Largest |root - eig(M)| / omega0 over matched pairs; diagnostic helper."""
    from .pseudomode import evolution_matrix

    mu = np.linalg.eigvals(evolution_matrix(params, phi).matrix)
    roots = feshbach_roots(phi, params)
    used = np.zeros(4, dtype=bool)
    worst = 0.0
    for r in roots:
        dist = np.where(used, np.inf, np.abs(mu - r))
        k = int(np.argmin(dist))
        used[k] = True
        worst = max(worst, float(dist[k]))
    return worst / params.omega0

