"""Physical parameters, derived constants and the collective basis.

Frequencies and rates are angular (rad/s), lengths in metres.  Every
heavy computation in the package runs on ``params.normalized()`` (omega0 = 1,
k0 = 1) and converts back at the I/O boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0


@dataclass(frozen=True)
class PhysicalParams:
    """Two qubits at x = -d and x = +d coupled to a Lorentzian reservoir.

    Attributes:
        omega0: qubit (and bath-centre) angular frequency.
        gamma: on-resonance coupling strength of the Lorentzian density.
        lam: spectral half-width of the Lorentzian (``lambda``).
        J: coherent exchange coupling; any sign.
        d: half-separation of the qubits.
        v: group velocity of the guide.
    """

    omega0: float
    gamma: float
    lam: float
    J: float = 0.0
    d: float = 0.0
    v: float = SPEED_OF_LIGHT

    def __post_init__(self):
        for name in ("omega0", "lam", "v"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive and finite, got {value!r}")
        # gamma = 0 is the decoupled limit and is allowed.
        if not (math.isfinite(self.gamma) and self.gamma >= 0):
            raise ValueError(f"gamma must be non-negative and finite, got {self.gamma!r}")
        if not (math.isfinite(self.J) and math.isfinite(self.d)):
            raise ValueError("J and d must be finite")

    @classmethod
    def from_g(cls, omega0, g, lam, J=0.0, d=0.0, v=SPEED_OF_LIGHT) -> "PhysicalParams":
        """Build from the pseudomode coupling g = sqrt(gamma * lam / 2)."""
        if g < 0:
            raise ValueError(f"g must be non-negative, got {g!r}")
        return cls(omega0=omega0, gamma=2.0 * g * g / lam, lam=lam, J=J, d=d, v=v)

    @property
    def k0(self) -> float:
        return self.omega0 / self.v

    @property
    def lambda0(self) -> float:
        return 2.0 * math.pi / self.k0

    @property
    def g(self) -> float:
        return math.sqrt(self.gamma * self.lam / 2.0)

    @property
    def lambda_tilde(self) -> complex:
        return complex(self.lam, -self.omega0)

    @property
    def phase(self) -> float:
        """Geometry phase k0 * d."""
        return self.k0 * self.d

    @property
    def d_node(self) -> float:
        """Separation pi / k0 at which the antisymmetric state is dark."""
        return math.pi / self.k0

    def with_d(self, d: float) -> "PhysicalParams":
        return replace(self, d=d)

    def normalized(self) -> "PhysicalParams":
        """Same physics in units omega0 = 1 and k0 = 1 (v = 1)."""
        w = self.omega0
        return PhysicalParams(
            omega0=1.0,
            gamma=self.gamma / w,
            lam=self.lam / w,
            J=self.J / w,
            d=self.d * self.k0,
            v=1.0,
        )


@dataclass(frozen=True)
class DerivedConstants:
    k0: float
    lambda0: float
    g: float
    lambda_tilde: complex


def derive_constants(params: PhysicalParams) -> DerivedConstants:
    return DerivedConstants(
        k0=params.k0,
        lambda0=params.lambda0,
        g=params.g,
        lambda_tilde=params.lambda_tilde,
    )


@dataclass(frozen=True)
class CollectiveAmplitudes:
    """Amplitudes on |S> = (|eg> + |ge>)/sqrt2 and |A> = (|eg> - |ge>)/sqrt2."""

    s: complex
    a: complex


_INV_SQRT2 = 1.0 / math.sqrt(2.0)


def to_collective(alpha1, alpha2) -> CollectiveAmplitudes:
    """Map qubit amplitudes to (s, a).  Works elementwise on arrays."""
    return CollectiveAmplitudes(
        s=(alpha1 + alpha2) * _INV_SQRT2,
        a=(alpha1 - alpha2) * _INV_SQRT2,
    )


def from_collective(s, a) -> tuple:
    """Inverse of :func:`to_collective`, returns (alpha1, alpha2)."""
    return (s + a) * _INV_SQRT2, (s - a) * _INV_SQRT2


def lorentzian_density(omega, params: PhysicalParams):
    """gamma * lam^2 / ((omega - omega0)^2 + lam^2)."""
    detuning = np.asarray(omega, dtype=float) - params.omega0
    out = params.gamma * params.lam**2 / (detuning**2 + params.lam**2)
    return float(out) if out.ndim == 0 else out


def hz_to_rad(f_hz: float) -> float:
    return 2.0 * math.pi * f_hz


def rad_to_hz(omega: float) -> float:
    return omega / (2.0 * math.pi)
