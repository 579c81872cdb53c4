"""Finite, uniformly spaced reservoir and exact single-excitation evolution.

The ladder of ``n_modes`` frequencies is centred on omega0 and spans
``[omega0 - span, omega0 + span]``.  Couplings follow
``|g_k|^2 = J_L(omega_k) * domega / (2 pi)`` so that the bath correlation
function converges to ``(gamma lam / 2) exp(-lam |t|)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import NumericalError
from .model import PhysicalParams, lorentzian_density, to_collective

EDGE_RATIO_RECOMMENDED = 50.0


@dataclass(frozen=True)
class DiscreteBathSpec:
    n_modes: int
    span: float
    use_k0_phase: bool = True
    # Required for n_modes == 1, where the mode spacing is undefined.
    coupling: Optional[float] = None

    def __post_init__(self):
        if int(self.n_modes) != self.n_modes or self.n_modes < 1:
            raise ValueError(f"n_modes must be a positive integer, got {self.n_modes!r}")
        if not (math.isfinite(self.span) and self.span > 0):
            raise ValueError(f"span must be positive, got {self.span!r}")
        if self.n_modes == 1 and self.coupling is None:
            raise ValueError("a single-mode bath needs an explicit coupling")

    @property
    def spacing(self) -> float:
        if self.n_modes < 2:
            raise ValueError("mode spacing is undefined for fewer than two modes")
        return 2.0 * self.span / (self.n_modes - 1)


def span_for_edge_ratio(lam: float, ratio: float = EDGE_RATIO_RECOMMENDED) -> float:
    """Half-window at which J_L has dropped to J_L(omega0) / ratio."""
    if ratio <= 1:
        raise ValueError("edge ratio must exceed 1")
    return lam * math.sqrt(ratio - 1.0)


@dataclass(frozen=True)
class BathModes:
    omegas: np.ndarray
    g_abs: np.ndarray
    phase1: np.ndarray
    phase2: np.ndarray

    @property
    def n_modes(self) -> int:
        return self.omegas.size

    @property
    def g1(self) -> np.ndarray:
        return self.g_abs * self.phase1

    @property
    def g2(self) -> np.ndarray:
        return self.g_abs * self.phase2


def build_modes(params: PhysicalParams, spec: DiscreteBathSpec) -> BathModes:
    if spec.n_modes == 1:
        omegas = np.array([params.omega0])
        g_abs = np.array([float(spec.coupling)])
    else:
        omegas = params.omega0 + np.linspace(-spec.span, spec.span, spec.n_modes)
        dw = spec.spacing
        g_abs = np.sqrt(lorentzian_density(omegas, params) * dw / (2.0 * math.pi))
        edge = params.lam**2 / (spec.span**2 + params.lam**2)
        if edge > 1.0 / EDGE_RATIO_RECOMMENDED:
            warnings.warn(
                f"bath window edge sits at {edge:.3g} of the Lorentzian peak "
                f"(recommended <= 1/{EDGE_RATIO_RECOMMENDED:g})",
                RuntimeWarning,
                stacklevel=2,
            )
    if spec.use_k0_phase:
        k = np.full_like(omegas, params.k0)
    else:
        k = omegas / params.v
    # Qubit 1 carries exp(+i k d), qubit 2 exp(-i k d).
    phase1 = np.exp(1j * k * params.d)
    phase2 = np.exp(-1j * k * params.d)
    return BathModes(omegas=omegas, g_abs=g_abs, phase1=phase1, phase2=phase2)


def poincare_time(spec: DiscreteBathSpec) -> float:
    """Recurrence time 2 pi / domega of the ladder."""
    if spec.n_modes < 2:
        raise ValueError("the Poincare time needs at least two modes")
    return 2.0 * math.pi / spec.spacing


def bath_correlation(params: PhysicalParams, modes: BathModes, times) -> np.ndarray:
    """sum_k |g_k|^2 exp(-i (omega_k - omega0) t)."""
    t = np.asarray(times, dtype=float)
    det = modes.omegas - params.omega0
    return np.exp(-1j * np.multiply.outer(t, det)) @ (modes.g_abs**2)


def assemble_hamiltonian(params: PhysicalParams, modes: BathModes, rotating: bool = False) -> np.ndarray:
    """Single-excitation Hamiltonian on (|eg,0>, |ge,0>, |gg,1_k>...).

    With ``rotating=True`` omega0 is subtracted from the diagonal, which
    removes the common carrier without changing populations or phases
    between amplitudes.
    """
    n = modes.n_modes
    H = np.zeros((n + 2, n + 2), dtype=complex)
    shift = params.omega0 if rotating else 0.0
    H[0, 0] = H[1, 1] = params.omega0 - shift
    H[0, 1] = H[1, 0] = params.J
    H[2:, 0] = modes.g1
    H[2:, 1] = modes.g2
    H[0, 2:] = np.conj(modes.g1)
    H[1, 2:] = np.conj(modes.g2)
    H[np.arange(2, n + 2), np.arange(2, n + 2)] = modes.omegas - shift
    return H


@dataclass
class SingleExcitationState:
    alpha1: complex
    alpha2: complex
    betas: np.ndarray

    @classmethod
    def excited(cls, qubit: int, n_modes: int) -> "SingleExcitationState":
        """|eg> (qubit=1) or |ge> (qubit=2) with the bath in vacuum."""
        if qubit not in (1, 2):
            raise ValueError("qubit must be 1 or 2")
        return cls(
            alpha1=1.0 + 0j if qubit == 1 else 0j,
            alpha2=1.0 + 0j if qubit == 2 else 0j,
            betas=np.zeros(n_modes, dtype=complex),
        )

    @classmethod
    def from_vector(cls, psi) -> "SingleExcitationState":
        psi = np.asarray(psi, dtype=complex)
        return cls(alpha1=psi[0], alpha2=psi[1], betas=psi[2:].copy())

    def as_vector(self) -> np.ndarray:
        return np.concatenate([[self.alpha1, self.alpha2], np.asarray(self.betas, dtype=complex)])

    def norm2(self) -> float:
        return float(abs(self.alpha1) ** 2 + abs(self.alpha2) ** 2 + np.sum(np.abs(self.betas) ** 2))


@dataclass
class BathTrajectory:
    """Amplitudes on a time grid; ``psi`` has shape (len(times), 2 + N_m)."""

    times: np.ndarray
    psi: np.ndarray

    @property
    def alpha1(self) -> np.ndarray:
        return self.psi[:, 0]

    @property
    def alpha2(self) -> np.ndarray:
        return self.psi[:, 1]

    @property
    def betas(self) -> np.ndarray:
        return self.psi[:, 2:]

    @property
    def P1(self) -> np.ndarray:
        return np.abs(self.alpha1) ** 2

    @property
    def P2(self) -> np.ndarray:
        return np.abs(self.alpha2) ** 2

    @property
    def P_bath(self) -> np.ndarray:
        return np.sum(np.abs(self.betas) ** 2, axis=1)

    @property
    def collective(self):
        return to_collective(self.alpha1, self.alpha2)

    def state(self, i: int) -> SingleExcitationState:
        return SingleExcitationState.from_vector(self.psi[i])

    def norm_error(self) -> float:
        return float(np.max(np.abs(np.sum(np.abs(self.psi) ** 2, axis=1) - 1.0)))


def evolve(H: np.ndarray, psi0, times) -> BathTrajectory:
    """psi(t) = V exp(-i E t) V^dagger psi0 from one Hermitian eigendecomposition."""
    t = np.asarray(times, dtype=float)
    if t.ndim != 1 or t.size == 0:
        raise ValueError("times must be a non-empty 1-D grid")
    if np.any(t < 0) or np.any(np.diff(t) < 0):
        raise ValueError("times must be sorted and non-negative")
    if isinstance(psi0, SingleExcitationState):
        psi0 = psi0.as_vector()
    psi0 = np.asarray(psi0, dtype=complex)
    norm0 = np.vdot(psi0, psi0).real
    if abs(norm0 - 1.0) > 1e-10:
        raise ValueError(f"initial state is not normalized (|psi|^2 = {norm0!r})")
    if not np.all(np.isfinite(H)):
        raise NumericalError(f"the {H.shape[0]}x{H.shape[0]} Hamiltonian has non-finite entries")
    try:
        E, V = np.linalg.eigh(H)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            f"eigendecomposition of the {H.shape[0]}x{H.shape[0]} Hamiltonian failed "
            f"(cond = {np.linalg.cond(H):.3g})"
        ) from exc
    coeff = V.conj().T @ psi0
    # (T, n) = exp(-i t E) * coeff, rotated back with V.
    psi = (np.exp(-1j * np.multiply.outer(t, E)) * coeff) @ V.T
    return BathTrajectory(times=t, psi=psi)
