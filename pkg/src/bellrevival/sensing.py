"""Displacement sensing with the near-node dark state.

A displacement delta_d from the node gives the dark branch a decay rate
Lambda0 (k0 delta_d)^2.  Each shot is a survive/decay Bernoulli trial after
``t_int``; the Fisher information of that trial bounds the resolution.
Units are SI: seconds, metres, s^-1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .feshbach import lambda0_prefactor
from .model import PhysicalParams

# Below this fraction of d_node the exact Fisher expression is replaced by its limit.
SMALL_DISPLACEMENT = 1e-9
READOUT_TIME = 20e-6


@dataclass(frozen=True)
class SensingProtocol:
    t_int: float
    n_rep: int
    lambda0_prefactor: float
    k0: float

    def __post_init__(self):
        for name in ("t_int", "lambda0_prefactor", "k0"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive and finite, got {value!r}")
        if int(self.n_rep) != self.n_rep or self.n_rep < 1:
            raise ValueError(f"n_rep must be an integer >= 1, got {self.n_rep!r}")

    @classmethod
    def from_params(cls, params: PhysicalParams, t_int: float, n_rep: int) -> "SensingProtocol":
        """Wire Lambda0 from the physical parameters (SI units)."""
        return cls(t_int=t_int, n_rep=int(n_rep), lambda0_prefactor=lambda0_prefactor(params), k0=params.k0)

    @property
    def d_node(self) -> float:
        return math.pi / self.k0


def decay_rate(delta_d, proto: SensingProtocol):
    dd = np.asarray(delta_d, dtype=float)
    out = proto.lambda0_prefactor * (proto.k0 * dd) ** 2
    return float(out) if out.ndim == 0 else out


def dark_lifetime_at(delta_d, proto: SensingProtocol):
    """1 / (Lambda0 (k0 delta_d)^2); infinite at the node."""
    rate = np.asarray(decay_rate(delta_d, proto), dtype=float)
    with np.errstate(divide="ignore"):
        out = np.where(rate > 0, 1.0 / np.where(rate > 0, rate, 1.0), np.inf)
    return float(out) if out.ndim == 0 else out


def survival_probability(delta_d, proto: SensingProtocol):
    dd = np.asarray(delta_d, dtype=float)
    if np.any(dd < 0):
        raise ValueError("delta_d must be non-negative")
    out = np.exp(-proto.lambda0_prefactor * proto.t_int * (proto.k0 * dd) ** 2)
    return float(out) if out.ndim == 0 else out


def fisher_weak_decay(proto: SensingProtocol) -> float:
    """4 Lambda0 k0^2 t_int, per shot."""
    return 4.0 * proto.lambda0_prefactor * proto.k0**2 * proto.t_int


def fisher_single_shot_exact(delta_d, proto: SensingProtocol):
    """(dP/d delta_d)^2 / (P (1 - P)) for the Bernoulli survival outcome.

    With x = Lambda0 t_int (k0 delta_d)^2 this is 4 Lambda0 k0^2 t_int * x / expm1(x),
    written so that it stays accurate for tiny x and underflows cleanly for large x.
    """
    dd = np.asarray(delta_d, dtype=float)
    if np.any(dd < 0):
        raise ValueError("delta_d must be non-negative")
    x = proto.lambda0_prefactor * proto.t_int * (proto.k0 * dd) ** 2
    small = dd < SMALL_DISPLACEMENT * proto.d_node
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        ratio = np.where(small, 1.0, x / np.expm1(np.where(small, 1.0, x)))
    ratio = np.where(np.isfinite(ratio), ratio, 0.0)
    out = fisher_weak_decay(proto) * ratio
    return float(out) if out.ndim == 0 else out


def crb_min_displacement(proto: SensingProtocol) -> float:
    """(1 / 2k0) sqrt(1 / (Lambda0 t_int N))."""
    return 1.0 / (2.0 * proto.k0 * math.sqrt(proto.lambda0_prefactor * proto.t_int * proto.n_rep))


def tolerance_band(proto: SensingProtocol, fractions=(1e-5, 1e-4)):
    """Dark lifetimes at the given delta_d / d_node fractions."""
    return [dark_lifetime_at(f * proto.d_node, proto) for f in fractions]
