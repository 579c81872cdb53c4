import math
import warnings

import numpy as np
import pytest

from bellrevival.bath import (
    BathModes,
    DiscreteBathSpec,
    SingleExcitationState,
    assemble_hamiltonian,
    bath_correlation,
    build_modes,
    evolve,
    poincare_time,
    span_for_edge_ratio,
)
from bellrevival.errors import NumericalError
from bellrevival.model import PhysicalParams, lorentzian_density, to_collective


def revival_run(params, n_modes=100, periods=3.5, samples=20001, k0_phase=True):
    spec = DiscreteBathSpec(n_modes, span_for_edge_ratio(params.lam), use_k0_phase=k0_phase)
    modes = build_modes(params, spec)
    H = assemble_hamiltonian(params, modes, rotating=True)
    tp = poincare_time(spec)
    t = np.linspace(0.0, periods * tp, samples)
    return evolve(H, SingleExcitationState.excited(1, n_modes), t), tp


def test_spec_validation():
    with pytest.raises(ValueError):
        DiscreteBathSpec(0, 1.0)
    with pytest.raises(ValueError):
        DiscreteBathSpec(10, 0.0)
    with pytest.raises(ValueError):
        DiscreteBathSpec(10, -1.0)
    with pytest.raises(ValueError):
        DiscreteBathSpec(1, 1.0)
    with pytest.raises(ValueError):
        DiscreteBathSpec(1, 1.0, coupling=0.1).spacing


def test_single_mode_needs_explicit_coupling():
    p = PhysicalParams(omega0=1.0, gamma=0.05, lam=0.066)
    m = build_modes(p, DiscreteBathSpec(1, 0.3, coupling=0.02))
    assert m.omegas.tolist() == [1.0]
    assert m.g_abs.tolist() == [0.02]


def test_coupling_rule_and_envelope(revival_params):
    spec = DiscreteBathSpec(100, span_for_edge_ratio(revival_params.lam))
    m = build_modes(revival_params, spec)
    dw = spec.spacing
    np.testing.assert_allclose(np.diff(m.omegas), dw, rtol=1e-10)
    assert m.omegas.mean() == pytest.approx(1.0, abs=1e-15)
    expected = lorentzian_density(m.omegas, revival_params) * dw / (2 * math.pi)
    np.testing.assert_allclose(m.g_abs**2, expected, rtol=1e-14)
    # even count: the two central modes share the maximum
    assert set(np.argsort(m.g_abs)[-2:]) == {49, 50}


def test_k0_phase_convention(revival_params):
    m = build_modes(revival_params, DiscreteBathSpec(10, 0.5))
    np.testing.assert_allclose(m.phase1, np.exp(1j * revival_params.phase))
    np.testing.assert_allclose(m.phase2, np.exp(-1j * revival_params.phase))


def test_narrow_window_warns(revival_params):
    with pytest.warns(RuntimeWarning):
        build_modes(revival_params, DiscreteBathSpec(20, 0.1))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        build_modes(revival_params, DiscreteBathSpec(20, span_for_edge_ratio(revival_params.lam)))


def test_poincare_time_definitions():
    # domega = 2 pi  ->  T_P = 1
    spec = DiscreteBathSpec(3, 2 * math.pi)
    assert spec.spacing == pytest.approx(2 * math.pi)
    assert poincare_time(spec) == pytest.approx(1.0)
    a = poincare_time(DiscreteBathSpec(50, 0.4))
    assert poincare_time(DiscreteBathSpec(50, 0.8)) == pytest.approx(a / 2, rel=1e-15)
    # doubling the number of spacings halves domega and doubles T_P
    assert poincare_time(DiscreteBathSpec(99, 0.4)) == pytest.approx(2 * a, rel=1e-15)
    with pytest.raises(ValueError):
        poincare_time(DiscreteBathSpec(1, 0.4, coupling=0.1))


def test_hamiltonian_structure(revival_params):
    m = build_modes(revival_params, DiscreteBathSpec(30, 0.5))
    H = assemble_hamiltonian(revival_params, m)
    assert np.max(np.abs(H - H.conj().T)) == 0.0
    assert H[0, 0] == H[1, 1] == 1.0
    assert H[0, 1] == H[1, 0] == revival_params.J
    np.testing.assert_array_equal(np.diag(H)[2:].real, m.omegas)
    Hr = assemble_hamiltonian(revival_params, m, rotating=True)
    np.testing.assert_allclose(np.diag(Hr).real, np.diag(H).real - 1.0, atol=1e-15)


def test_symmetric_channel_decouples_at_quarter_wavelength(revival_params):
    m = build_modes(revival_params, DiscreteBathSpec(40, 0.5))
    H = assemble_hamiltonian(revival_params, m)
    s_row = (H[2:, 0] + H[2:, 1]) / math.sqrt(2)
    a_row = (H[2:, 0] - H[2:, 1]) / math.sqrt(2)
    assert np.max(np.abs(s_row)) < 1e-15
    np.testing.assert_allclose(np.abs(a_row), math.sqrt(2) * m.g_abs, rtol=1e-14)


def test_evolve_identity_at_t0(revival_params):
    m = build_modes(revival_params, DiscreteBathSpec(20, 0.5))
    H = assemble_hamiltonian(revival_params, m, rotating=True)
    psi0 = SingleExcitationState.excited(2, 20)
    tr = evolve(H, psi0, [0.0, 1.0])
    np.testing.assert_allclose(tr.psi[0], psi0.as_vector(), atol=1e-14)


def test_vacuum_rabi_oscillation():
    p = PhysicalParams(omega0=1.0, gamma=0.05, lam=0.066)
    g = 0.03
    modes = BathModes(
        omegas=np.array([1.0]),
        g_abs=np.array([g]),
        phase1=np.array([1.0 + 0j]),
        phase2=np.array([0.0 + 0j]),
    )
    H = assemble_hamiltonian(p, modes, rotating=True)
    t = np.linspace(0, 500, 1001)
    tr = evolve(H, SingleExcitationState.excited(1, 1), t)
    np.testing.assert_allclose(tr.P1, np.cos(g * t) ** 2, atol=1e-12)
    np.testing.assert_allclose(tr.P2, 0.0, atol=1e-20)


def test_evolve_input_validation(revival_params):
    m = build_modes(revival_params, DiscreteBathSpec(5, 0.5))
    H = assemble_hamiltonian(revival_params, m)
    with pytest.raises(ValueError):
        evolve(H, SingleExcitationState.excited(1, 5), [1.0, 0.5])
    with pytest.raises(ValueError):
        evolve(H, np.ones(7), [0.0])
    with pytest.raises(NumericalError):
        evolve(np.full((7, 7), np.nan), SingleExcitationState.excited(1, 5), [0.0])


def test_norm_conservation_and_dark_freezing(revival_params):
    tr, tp = revival_run(revival_params)
    assert tr.norm_error() < 1e-10
    s2 = np.abs(tr.collective.s) ** 2
    assert np.max(np.abs(s2 - 0.5)) < 1e-8
    assert tr.times[-1] >= 3 * tp


def test_dark_freezing_at_shifted_node():
    # d = lambda0/2 + lambda0/4 is another symmetric-dark geometry
    p = PhysicalParams(omega0=1.0, gamma=0.05, lam=0.066, J=-1e-3, d=1.5 * math.pi, v=1.0)
    tr, _ = revival_run(p, periods=3.0, samples=3001)
    assert np.max(np.abs(np.abs(tr.collective.s) ** 2 - 0.5)) < 1e-8


def test_antisymmetric_amplitude_revives_near_poincare_times(revival_params):
    tr, tp = revival_run(revival_params)
    a2 = np.abs(tr.collective.a) ** 2
    for n in (1, 2, 3):
        window = (tr.times > (n - 0.25) * tp) & (tr.times < (n + 0.25) * tp)
        peak = tr.times[window][np.argmax(a2[window])]
        # re-absorption delays each revival by a few percent of T_P
        assert abs(peak - n * tp) < 0.05 * n * tp
        assert a2[window].max() > 0.3


def test_bath_population_returns_near_poincare_time(revival_params):
    tr, tp = revival_run(revival_params, periods=1.2)
    pb = tr.P_bath
    between = pb[tr.times < tp].max()
    near = pb[(tr.times >= tp) & (tr.times <= 1.05 * tp)].min()
    assert near < 0.1 * between


def test_bath_correlation_converges_to_exponential_kernel():
    lam = 0.066
    p = PhysicalParams(omega0=1.0, gamma=0.05, lam=lam)
    t = np.linspace(0, 3 / lam, 400)
    ref = p.g**2 * np.exp(-lam * t)
    errors = []
    for n in (51, 101, 201, 401, 801):
        # the window widens with n while T_P stays far outside [0, 3/lam]
        spec = DiscreteBathSpec(n, lam * n / 8)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            c = bath_correlation(p, build_modes(p, spec), t)
        errors.append(np.linalg.norm(c - ref) / np.linalg.norm(ref))
    assert all(b < a for a, b in zip(errors, errors[1:]))
    assert errors[-1] < 2e-3


@pytest.mark.parametrize("lam", [1e-3, 1e-2, 0.066])
def test_exact_phase_correction_is_second_order(lam):
    p = PhysicalParams(omega0=1.0, gamma=0.05 * lam / 0.066, lam=lam, J=-1e-3, d=0.5 * math.pi, v=1.0)
    spec = DiscreteBathSpec(100, span_for_edge_ratio(lam))
    t = np.linspace(0, 20 / lam, 2001)
    runs = []
    for k0_phase in (True, False):
        s = DiscreteBathSpec(spec.n_modes, spec.span, use_k0_phase=k0_phase)
        H = assemble_hamiltonian(p, build_modes(p, s), rotating=True)
        runs.append(evolve(H, SingleExcitationState.excited(1, 100), t))
    dev = np.max(np.abs(runs[0].P1 - runs[1].P1))
    assert dev <= (spec.span * p.d / p.v) ** 2


def test_trajectory_accessors(revival_params):
    tr, _ = revival_run(revival_params, periods=0.1, samples=11)
    st = tr.state(5)
    assert st.norm2() == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(tr.P1 + tr.P2 + tr.P_bath, 1.0, atol=1e-12)
    c = to_collective(tr.alpha1, tr.alpha2)
    np.testing.assert_allclose(tr.collective.a, c.a)
