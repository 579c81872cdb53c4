"""Revival, map, lifetime and sensing pipelines over parameter sweeps.

Each ``run_*`` function takes a validated :class:`RunConfig`, returns a
result table (column names plus rows) and can be written to CSV with
:func:`write_csv`.  All heavy work runs in omega0 = 1 units.
"""

from __future__ import annotations

import csv
import io
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import mpmath
import numpy as np

from . import __version__
from .backflow import TimeSeries, bell_backflow, blp_measure, detect_peaks, positive_increments
from .bath import DiscreteBathSpec, assemble_hamiltonian, build_modes, evolve, poincare_time, span_for_edge_ratio
from .config import Quantity, RunConfig
from .errors import NumericalError
from .feshbach import lambda0_prefactor
from .model import PhysicalParams
from .observables import chsh_closed, qmi, trace_distance_single_excitation
from .pseudomode import (
    FourModeState,
    dark_lifetime,
    evolution_matrix,
    evolution_matrix_any,
    propagate,
    spectral_decompose,
)
from .sensing import SensingProtocol, crb_min_displacement, fisher_weak_decay

_INV_SQRT2 = 1.0 / math.sqrt(2.0)
# Qubit amplitudes of the supported initial states and of their partner in the distance pair.
INITIAL_AMPLITUDES = {
    "eg": (1.0, 0.0),
    "ge": (0.0, 1.0),
    "S": (_INV_SQRT2, _INV_SQRT2),
    "A": (_INV_SQRT2, -_INV_SQRT2),
}
PARTNER = {"eg": "ge", "ge": "eg", "S": "A", "A": "S"}


@dataclass
class Table:
    columns: List[str]
    rows: List[Sequence]
    footer: Dict[str, object] = field(default_factory=dict)
    extras: Dict[str, object] = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        i = self.columns.index(name)
        return np.array([r[i] for r in self.rows], dtype=float)


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (list, tuple)):
        return ";".join(_fmt(v) for v in x)
    if isinstance(x, str):
        return x
    return repr(float(x))


def render_csv(table: Table, config: RunConfig, command: str) -> str:
    buf = io.StringIO()
    buf.write(f"# bellrevival {__version__}\n")
    buf.write(f"# command = {command}\n")
    for line in config.to_ini().splitlines():
        buf.write(f"# {line}\n" if line else "#\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([_fmt(x) for x in row])
    for key, value in table.footer.items():
        buf.write(f"# {key} = {_fmt(value)}\n")
    return buf.getvalue()


def write_csv(path: str, table: Table, config: RunConfig, command: str) -> None:
    text = render_csv(table, config, command)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _parallel_map(fn: Callable, items: list, threads: Optional[int]) -> list:
    """Ordered map, in worker processes when more than one is allowed."""
    workers = (os.cpu_count() or 1) if threads is None else max(1, int(threads))
    workers = min(workers, len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _time_grid(horizon: float, samples_per_period: int) -> np.ndarray:
    dt = 2.0 * math.pi / samples_per_period
    n = int(math.floor(horizon / dt + 1e-9)) + 1
    return np.arange(n) * dt


def _horizon(q: Quantity, params: PhysicalParams, t_p: Optional[float] = None) -> float:
    """Horizon in 1/omega0 units; ``t_p`` is already normalized."""
    w0 = params.omega0
    return q.in_si(w0, params.k0, None if t_p is None else t_p / w0) * w0


# -- revival ---------------------------------------------------------------

REVIVAL_COLUMNS = ["t", "P1", "P2", "P_bath", "s2", "a2", "D", "I_AB", "B"]


def run_revival(config: RunConfig) -> Table:
    cfg = config.with_defaults("revival")
    params = cfg.params()
    norm = params.normalized()
    b = cfg.bath
    span = span_for_edge_ratio(norm.lam, b.edge_ratio) if b.span is None else cfg._si(b.span) / params.omega0
    spec = DiscreteBathSpec(n_modes=b.n_modes, span=span, use_k0_phase=b.use_k0_phase)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore" if b.span is None else "default", RuntimeWarning)
        modes = build_modes(norm, spec)
    t_p = poincare_time(spec)
    times = _time_grid(_horizon(cfg.sweep.horizon, params, t_p), cfg.sweep.samples_per_period)

    H = assemble_hamiltonian(norm, modes, rotating=True)

    def start(label):
        psi = np.zeros(b.n_modes + 2, dtype=complex)
        psi[:2] = INITIAL_AMPLITUDES[label]
        return psi

    main = evolve(H, start(cfg.initial), times)
    partner = evolve(H, start(PARTNER[cfg.initial]), times)
    if main.norm_error() > 1e-9:
        raise NumericalError(f"norm drift {main.norm_error():.3g} in the discrete evolution")

    P1, P2 = main.P1, main.P2
    tot = P1 + P2
    scale = np.maximum(1.0, tot)
    P1, P2 = P1 / scale, P2 / scale
    coll = main.collective
    D = trace_distance_single_excitation(main.alpha1, main.alpha2, partner.alpha1, partner.alpha2)
    I_AB = qmi(P1, P2)
    B = chsh_closed(P1, P2)

    t_out = times if cfg.physical.normalized else times / params.omega0
    rows = list(
        zip(t_out, P1, P2, main.P_bath, np.abs(coll.s) ** 2, np.abs(coll.a) ** 2, D, I_AB, B)
    )
    prom = cfg.sweep.min_prominence
    series = {name: TimeSeries(times, vals) for name, vals in (("D", D), ("I_AB", I_AB), ("B", B))}
    unit = 1.0 if cfg.physical.normalized else 1.0 / params.omega0
    footer = {
        "N_blp": blp_measure(series["D"]),
        "N_bell": bell_backflow(series["B"]),
        "T_P": t_p * unit,
        "peaks_D": [t * unit for t in detect_peaks(series["D"], prom)],
        "peaks_I_AB": [t * unit for t in detect_peaks(series["I_AB"], prom)],
        "peaks_B": [t * unit for t in detect_peaks(series["B"], prom)],
    }
    extras = {"trajectory": main, "partner": partner, "t_p": t_p, "times": times, "modes": modes}
    return Table(REVIVAL_COLUMNS, rows, footer, extras)


# -- geometry/bandwidth map --------------------------------------------------

MAP_COLUMNS = ["d", "lambda", "N_blp", "N_bell"]


FRACTION_GRID = 2.0**-40


def _d_fraction(q: Quantity, k0: float) -> float:
    """d / lambda0 reduced to [0, 1) and snapped to a 2^-40 grid.

    Adding lambda0 costs the low bits of the fraction; snapping makes rows at
    d and d + lambda0 bit-identical while moving d by under 1e-12 lambda0.
    """
    f = q.value if q.unit == "lambda0" else q.value * k0 / (2.0 * math.pi)
    f = round((f - math.floor(f)) / FRACTION_GRID) * FRACTION_GRID
    return 0.0 if f >= 1.0 else f


def map_cell(phi: float, g: float, lam: float, J: float, times: np.ndarray):
    """(N_blp, N_bell) for one (d, lambda) cell in omega0 = 1 units."""
    p = PhysicalParams.from_g(1.0, g, lam, J=J, v=1.0)
    em = evolution_matrix(p, phi)
    try:
        dec = spectral_decompose(em)
    except NumericalError:
        raise
    except Exception as exc:  # pragma: no cover - LAPACK failure
        raise NumericalError(f"eigendecomposition failed at phi={phi!r}, lambda={lam!r}: {exc}") from exc
    amps = {}
    for label in ("eg", "ge", "S"):
        a1, a2 = INITIAL_AMPLITUDES[label]
        tr = propagate(dec, FourModeState.from_qubits(a1, a2), times)
        amps[label] = tr.qubit_amplitudes()
    D = trace_distance_single_excitation(*amps["eg"], *amps["ge"])
    s1, s2 = amps["S"]
    P1, P2 = np.abs(s1) ** 2, np.abs(s2) ** 2
    scale = np.maximum(1.0, P1 + P2)
    B = chsh_closed(P1 / scale, P2 / scale)
    return positive_increments(D), positive_increments(B)


def _map_row(job):
    phi, g, lams, J, times = job
    return [map_cell(phi, g, lam, J, times) for lam in lams]


def run_map(config: RunConfig, threads: Optional[int] = None) -> Table:
    cfg = config.with_defaults("map")
    params = cfg.params()
    w0, k0 = params.omega0, params.k0
    d_q = cfg.sweep.d_values.quantities()
    lam_si = [cfg._si(q) for q in cfg.sweep.lambda_values.quantities()]
    times = _time_grid(_horizon(cfg.sweep.horizon, params), cfg.sweep.samples_per_period)
    g_n, J_n = params.g / w0, params.J / w0
    lam_n = [x / w0 for x in lam_si]
    jobs = [(2.0 * math.pi * _d_fraction(q, k0), g_n, lam_n, J_n, times) for q in d_q]
    results = _parallel_map(_map_row, jobs, threads)
    rows = []
    for q, row in zip(d_q, results):
        d_out = q.value if q.unit == "lambda0" else q.value * k0 / (2 * math.pi)
        if not cfg.physical.normalized:
            d_out = cfg._si(q)
        for lam_value, (n_blp, n_bell) in zip(lam_n, row):
            rows.append((d_out, lam_value if cfg.physical.normalized else lam_value * w0, n_blp, n_bell))
    return Table(MAP_COLUMNS, rows)


# -- lifetime scan -----------------------------------------------------------

LIFETIME_COLUMNS = ["delta_d_frac", "gamma_exact", "gamma_analytic", "T_df_exact_lambda", "T_df_analytic_lambda"]


def _lifetime_point(job):
    frac, g, lam, J, dps = job
    p = PhysicalParams.from_g(1.0, g, lam, J=J, v=1.0)
    with mpmath.workdps(dps):
        phi = mpmath.pi * (1 + mpmath.mpf(frac))
    lt = dark_lifetime(spectral_decompose(evolution_matrix_any(p, phi), dps=dps))
    eps = math.pi * frac
    analytic = lambda0_prefactor(p) * eps * eps
    return lt.gamma_df, analytic


def run_lifetime_scan(config: RunConfig, threads: Optional[int] = None) -> Table:
    cfg = config.with_defaults("lifetime")
    params = cfg.params()
    w0 = params.omega0
    fracs = [q.value for q in cfg.sweep.delta_d_fracs.quantities()]
    g_n, lam_n, J_n = params.g / w0, params.lam / w0, params.J / w0
    jobs = [(f, g_n, lam_n, J_n, cfg.sweep.dps) for f in fracs]
    results = _parallel_map(_lifetime_point, jobs, threads)
    unit = 1.0 if cfg.physical.normalized else w0
    rows = []
    for f, (g_ex, g_an) in zip(fracs, results):
        t_ex = lam_n / g_ex if g_ex > 0 else math.inf
        t_an = lam_n / g_an if g_an > 0 else math.inf
        rows.append((f, g_ex * unit, g_an * unit, t_ex, t_an))
    return Table(LIFETIME_COLUMNS, rows, footer={"Lambda0": lambda0_prefactor(params) / w0 * unit})


# -- Cramer-Rao table --------------------------------------------------------

CRB_COLUMNS = ["t_int", "n_rep", "fisher", "delta_d_min"]


def run_crb(config: RunConfig) -> Table:
    cfg = config.with_defaults("crb")
    params = cfg.params()
    rows = []
    for q, n in zip(cfg.sensing.t_int.quantities(), cfg.sensing.n_rep):
        proto = SensingProtocol.from_params(params, q.value, n)
        rows.append((q.value, n, fisher_weak_decay(proto), crb_min_displacement(proto)))
    return Table(CRB_COLUMNS, rows, footer={"Lambda0": lambda0_prefactor(params), "k0": params.k0})


def run(command: str, config: RunConfig, threads: Optional[int] = None) -> Table:
    if command == "revival":
        return run_revival(config)
    if command == "map":
        return run_map(config, threads)
    if command == "lifetime":
        return run_lifetime_scan(config, threads)
    if command == "crb":
        return run_crb(config)
    raise ValueError(f"unknown command {command!r}")
