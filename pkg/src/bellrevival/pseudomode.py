"""Continuum-limit four-mode model X = [s, a, beta, alpha].

``Xdot = M X`` with M built from the geometry phase phi = k0 d.  Decompositions
are done in the frame rotating at omega0 (M + i omega0 I); decay rates are
unchanged and frequencies come out relative to omega0.

Three decomposition routes:

* exact nodes (sin 2phi = 0 and cos phi or sin phi = 0): M splits into two
  2x2 blocks solved in closed form, so the dark rate is exactly zero;
* default: dense complex eigensolver;
* ``dps=...``: mpmath eigensolver at that many digits, needed near a node
  where the dark rate drops far below double-precision round-off.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Optional

import mpmath
import numpy as np

from .errors import NumericalError
from .model import PhysicalParams, from_collective, to_collective

NODE_SNAP = 1e-12
RESIDUAL_TOL = 1e-9
PASSIVITY_TOL = 1e-12
DEGENERACY_TOL = 1e-10
DOUBLE_RATE_FLOOR = 1e-14


def geometry_trig(phi):
    """(cos^2 phi, sin^2 phi, sin 2phi), snapped to exact values at multiples of pi/2."""
    if isinstance(phi, mpmath.mpf):
        return mpmath.cos(phi) ** 2, mpmath.sin(phi) ** 2, mpmath.sin(2 * phi)
    r = phi / (0.5 * math.pi)
    k = round(r)
    if abs(r - k) < NODE_SNAP:
        if k % 2 == 0:
            return 1.0, 0.0, 0.0
        return 0.0, 1.0, 0.0
    c, s = math.cos(phi), math.sin(phi)
    return c * c, s * s, math.sin(2.0 * phi)


@dataclass(frozen=True)
class FourModeState:
    s: complex
    a: complex
    beta: complex = 0j
    alpha: complex = 0j

    @classmethod
    def from_qubits(cls, alpha1: complex, alpha2: complex) -> "FourModeState":
        c = to_collective(alpha1, alpha2)
        return cls(s=c.s, a=c.a)

    def as_vector(self) -> np.ndarray:
        return np.array([self.s, self.a, self.beta, self.alpha], dtype=complex)


@dataclass(frozen=True)
class EvolutionMatrix:
    matrix: np.ndarray
    phi: float
    params: PhysicalParams

    def rotating(self) -> np.ndarray:
        return self.matrix + 1j * self.params.omega0 * np.eye(4)

    @property
    def at_node(self) -> bool:
        c2, s2, sn = geometry_trig(self.phi)
        return sn == 0 and (c2 == 0 or s2 == 0)


def _matrix_entries(params: PhysicalParams, phi, one, imag):
    c2, s2, sn = geometry_trig(phi)
    w0, J, g = params.omega0 * one, params.J * one, _g(params, one)
    lt = params.lam * one - imag * w0
    zero = 0 * one
    return [
        [-imag * (w0 + J), zero, 2 * imag * g * c2, -g * sn],
        [zero, -imag * (w0 - J), g * sn, 2 * imag * g * s2],
        [imag * g, zero, -lt, zero],
        [zero, imag * g, zero, -lt],
    ]


def _g(params, one):
    if isinstance(one, mpmath.mpf):
        return mpmath.sqrt(mpmath.mpf(params.gamma) * params.lam / 2)
    return params.g


def evolution_matrix(params: PhysicalParams, phi) -> EvolutionMatrix:
    rows = _matrix_entries(params, float(phi), 1.0, 1j)
    return EvolutionMatrix(matrix=np.array(rows, dtype=complex), phi=phi, params=params)


def build_M(params: PhysicalParams, d: Optional[float] = None) -> EvolutionMatrix:
    """Evolution matrix at separation ``d`` (defaults to ``params.d``)."""
    d = params.d if d is None else d
    return evolution_matrix(params, params.k0 * d)


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigensystem of the rotating-frame matrix, slowest decay first."""

    eigenvalues: np.ndarray
    P: np.ndarray
    P_inv: np.ndarray
    reconstruction_residual: float
    omega0: float
    dps: Optional[int] = None

    @property
    def decay_rates(self) -> np.ndarray:
        return -self.eigenvalues.real

    @property
    def frequencies(self) -> np.ndarray:
        """Oscillation frequencies relative to omega0."""
        return self.eigenvalues.imag

    @property
    def lab_eigenvalues(self) -> np.ndarray:
        return self.eigenvalues - 1j * self.omega0


def _eig2(p, q, r, t):
    """Eigenpairs of [[p, q], [r, t]] via the stable quadratic formula."""
    m = 0.5 * (p + t)
    disc = np.sqrt(complex((0.5 * (p - t)) ** 2 + q * r))
    mu1 = m + disc if abs(m + disc) >= abs(m - disc) else m - disc
    det = p * t - q * r
    mu2 = det / mu1 if mu1 != 0 else m - (mu1 - m)
    vecs = []
    for k, mu in enumerate((mu1, mu2)):
        va = np.array([q, mu - p], dtype=complex)
        vb = np.array([mu - t, r], dtype=complex)
        v = va if np.linalg.norm(va) >= np.linalg.norm(vb) else vb
        if np.linalg.norm(v) == 0.0:
            v = np.eye(2, dtype=complex)[k]
        vecs.append(v / np.linalg.norm(v))
    return np.array([mu1, mu2]), np.column_stack(vecs)


def _block_decompose(Mf: np.ndarray):
    mu = np.empty(4, dtype=complex)
    P = np.zeros((4, 4), dtype=complex)
    for cols, (i, j) in zip(((0, 1), (2, 3)), ((0, 2), (1, 3))):
        vals, vecs = _eig2(Mf[i, i], Mf[i, j], Mf[j, i], Mf[j, j])
        for c, val, vec in zip(cols, vals, vecs.T):
            mu[c] = val
            P[[i, j], c] = vec
    return mu, P


def _mp_decompose(em: EvolutionMatrix, dps: int):
    with mpmath.workdps(dps):
        one = mpmath.mpf(1)
        phi = em.phi if isinstance(em.phi, mpmath.mpf) else mpmath.mpf(em.phi)
        rows = _matrix_entries(em.params, phi, one, mpmath.mpc(0, 1))
        Mf = mpmath.matrix(rows) + mpmath.mpc(0, 1) * mpmath.mpf(em.params.omega0) * mpmath.eye(4)
        E, ER = mpmath.eig(Mf)
        Pm = ER
        Pinv_m = Pm**-1
        recon = Pm * mpmath.diag(E) * Pinv_m
        residual = mpmath.mnorm(recon - Mf, "f") / mpmath.mnorm(Mf, "f")
        mu = np.array([complex(e) for e in E])
        P = np.array(Pm.tolist(), dtype=complex)
        Pinv = np.array(Pinv_m.tolist(), dtype=complex)
        return mu, P, Pinv, float(residual)


def spectral_decompose(M, dps: Optional[int] = None, _retry: bool = True) -> SpectralDecomposition:
    """Diagonalize the evolution matrix.

    ``M`` is an :class:`EvolutionMatrix` (preferred; enables the exact-node
    and high-precision routes) or a raw 4x4 lab-frame array, in which case
    omega0 is read off as -Im M[0,0] averaged with -Im M[1,1].
    """
    if isinstance(M, EvolutionMatrix):
        omega0 = M.params.omega0
        Mf = M.rotating()
    else:
        Ml = np.asarray(M, dtype=complex)
        if Ml.shape != (4, 4) or not np.all(np.isfinite(Ml)):
            raise ValueError("expected a finite 4x4 matrix")
        omega0 = -0.5 * (Ml[0, 0] + Ml[1, 1]).imag
        Mf = Ml + 1j * omega0 * np.eye(4)

    if dps is not None:
        if not isinstance(M, EvolutionMatrix):
            raise ValueError("the high-precision route needs an EvolutionMatrix")
        mu, P, Pinv, residual = _mp_decompose(M, dps)
    else:
        if isinstance(M, EvolutionMatrix) and M.at_node:
            mu, P = _block_decompose(Mf)
        else:
            mu, P = np.linalg.eig(Mf)
        try:
            Pinv = np.linalg.inv(P)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"singular eigenvector matrix at {_point(M)}") from exc
        residual = float(np.linalg.norm(P @ np.diag(mu) @ Pinv - Mf) / np.linalg.norm(Mf))

    scale = max(abs(omega0), 1e-300)
    gaps = np.where(np.eye(4, dtype=bool), np.inf, np.abs(mu[:, None] - mu[None, :]))
    if dps is None and gaps.min() < DEGENERACY_TOL * scale and np.linalg.cond(P) > 1e8:
        if _retry and isinstance(M, EvolutionMatrix):
            warnings.warn(f"near-degenerate eigenvalues at {_point(M)}; perturbing d by 1e-12", RuntimeWarning, stacklevel=2)
            nudged = evolution_matrix(M.params, M.phi * (1.0 + 1e-12) if M.phi else 1e-12)
            return spectral_decompose(nudged, _retry=False)
        raise NumericalError(f"defective evolution matrix at {_point(M)}")
    if residual > RESIDUAL_TOL:
        raise NumericalError(f"reconstruction residual {residual:.3g} at {_point(M)}")
    if np.max(mu.real) > PASSIVITY_TOL * scale:
        raise NumericalError(f"growing mode (Re mu = {np.max(mu.real):.3g}) at {_point(M)}")

    order = np.argsort(-mu.real, kind="stable")
    return SpectralDecomposition(
        eigenvalues=mu[order],
        P=P[:, order],
        P_inv=Pinv[order, :],
        reconstruction_residual=residual,
        omega0=omega0,
        dps=dps,
    )


def _point(M) -> str:
    if isinstance(M, EvolutionMatrix):
        p = M.params
        return f"(phi={float(M.phi)!r}, g={p.g!r}, lambda={p.lam!r}, J={p.J!r}, omega0={p.omega0!r})"
    return "(raw matrix)"


@dataclass
class FourModeTrajectory:
    """Rotating-frame amplitudes; ``X`` has shape (len(times), 4)."""

    times: np.ndarray
    X: np.ndarray

    @property
    def s(self) -> np.ndarray:
        return self.X[:, 0]

    @property
    def a(self) -> np.ndarray:
        return self.X[:, 1]

    @property
    def beta(self) -> np.ndarray:
        return self.X[:, 2]

    @property
    def alpha(self) -> np.ndarray:
        return self.X[:, 3]

    def qubit_amplitudes(self):
        return from_collective(self.s, self.a)


def _initial_vector(X0) -> np.ndarray:
    if isinstance(X0, FourModeState):
        return X0.as_vector()
    X0 = np.asarray(X0, dtype=complex)
    if X0.shape != (4,):
        raise ValueError("initial state must have four components [s, a, beta, alpha]")
    return X0


def propagate(decomp: SpectralDecomposition, X0, times) -> FourModeTrajectory:
    """X(t) = P exp(Lambda t) P^-1 X(0)."""
    t = np.asarray(times, dtype=float)
    if t.ndim != 1 or np.any(t < 0) or np.any(np.diff(t) < 0):
        raise ValueError("times must be a sorted, non-negative 1-D grid")
    c = decomp.P_inv @ _initial_vector(X0)
    X = (np.exp(np.multiply.outer(t, decomp.eigenvalues)) * c) @ decomp.P.T
    return FourModeTrajectory(times=t, X=X)


def rk4_reference(M, X0, times, max_step: Optional[float] = None) -> np.ndarray:
    """Classical fixed-step RK4 for Xdot = M X, used to cross-check :func:`propagate`.

    ``M`` may carry leading batch dimensions (..., n, n) with ``X0`` shaped
    (..., n); ``times`` is either shared (T,) or per batch (..., T).  Each
    output interval is split into the same number of equal sub-steps across
    the batch, at most ``max_step`` long in units where ``max |M_ij| = 1``
    (default 2e-3).  Returns an array of shape (..., T, n).
    """
    M = np.asarray(M, dtype=complex)
    X = np.array(X0, dtype=complex)
    t = np.asarray(times, dtype=float)
    batch = M.shape[:-2]
    t = np.broadcast_to(t, batch + t.shape[-1:])
    if np.any(np.diff(t, axis=-1) < 0):
        raise ValueError("times must be sorted")
    norm = np.max(np.abs(M), axis=(-2, -1))
    rel_step = 2e-3 if max_step is None else max_step
    if rel_step > 0.05:
        warnings.warn("RK4 step exceeds 0.05 / max|M_ij|; accuracy will suffer", RuntimeWarning, stacklevel=2)

    out = np.empty(batch + (t.shape[-1], M.shape[-1]), dtype=complex)
    out[..., 0, :] = X
    Mv = lambda v: np.matmul(M, v[..., None])[..., 0]  # noqa: E731
    for k in range(t.shape[-1] - 1):
        dt = t[..., k + 1] - t[..., k]
        n_sub = max(1, int(math.ceil(float(np.max(dt * norm)) / rel_step)))
        h = (dt / n_sub)[..., None]
        for _ in range(n_sub):
            k1 = Mv(X)
            k2 = Mv(X + 0.5 * h * k1)
            k3 = Mv(X + 0.5 * h * k2)
            k4 = Mv(X + h * k3)
            X = X + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[..., k + 1, :] = X
    return out


def excitation_norm(X, phi) -> np.ndarray:
    """|s|^2 + |a|^2 + p^dagger W p with p = (beta, alpha).

    W = [[2cos^2, i sin2phi], [-i sin2phi, 2 sin^2]] is the metric in which the
    pseudomode coupling is skew-adjoint, so this quantity never grows.
    """
    X = np.asarray(X, dtype=complex)
    c2, s2, sn = geometry_trig(phi)
    s, a, b, al = X[..., 0], X[..., 1], X[..., 2], X[..., 3]
    quad = 2 * c2 * np.abs(b) ** 2 + 2 * s2 * np.abs(al) ** 2 + 2.0 * np.real(1j * sn * np.conj(b) * al)
    return np.abs(s) ** 2 + np.abs(a) ** 2 + quad


@dataclass(frozen=True)
class DarkLifetime:
    gamma_df: float
    T_df: float
    protected: bool
    index: Optional[int] = None


def default_rate_floor(decomp: SpectralDecomposition) -> float:
    if decomp.dps is None:
        return DOUBLE_RATE_FLOOR * decomp.omega0
    return 10.0 ** (-(decomp.dps - 10)) * decomp.omega0


def dark_lifetime(decomp: SpectralDecomposition, rate_floor: Optional[float] = None) -> DarkLifetime:
    """Slowest decay rate above ``rate_floor`` and its inverse.

    Rates at or below the floor count as exact zero modes; if every rate is
    that small the state is reported as protected (infinite lifetime).  Any
    zero mode present is reported as protected as well, since it outlives
    every decaying branch.
    """
    floor = default_rate_floor(decomp) if rate_floor is None else rate_floor
    rates = decomp.decay_rates
    if np.any(rates <= floor):
        return DarkLifetime(gamma_df=0.0, T_df=math.inf, protected=True)
    i = int(np.argmin(rates))
    return DarkLifetime(gamma_df=float(rates[i]), T_df=1.0 / float(rates[i]), protected=False, index=i)


def lifetime_at(params: PhysicalParams, phi, dps: Optional[int] = None) -> DarkLifetime:
    return dark_lifetime(spectral_decompose(evolution_matrix_any(params, phi), dps=dps))


def evolution_matrix_any(params: PhysicalParams, phi) -> EvolutionMatrix:
    """Like :func:`evolution_matrix` but keeps an mpmath phase for the high-precision route."""
    em = evolution_matrix(params, float(phi))
    return replace(em, phi=phi) if isinstance(phi, mpmath.mpf) else em
