import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from catamp import analysis, frame, propagator, protocols
from catamp.fock import SystemState
from catamp.frame import (CoefficientVector, IncompleteBasisError,
                          dynamical_eigenstate, expand_in_frame,
                          assemble_from_frame, first_order_propagator,
                          frame_basis, gtilde_step, gtilde_trajectory,
                          sigma_z_matrix)
from catamp.model import (SIGMA_Z, Constant, Cosine, Linear, Schedule, Segment)

W = 1.0
T = 2.0 * math.pi


def ode_gtilde(g_of_t, t0, t1, g0c):
    """Adaptive ODE oracle for d(gtilde)/dt = i w (g - gtilde)."""
    def rhs(t, y):
        d = 1j * W * (g_of_t(t) - (y[0] + 1j * y[1]))
        return [d.real, d.imag]
    sol = solve_ivp(rhs, (t0, t1), [g0c.real, g0c.imag], rtol=1e-12,
                    atol=1e-14, method="DOP853")
    return sol.y[0, -1] + 1j * sol.y[1, -1]


def test_constant_fixed_point_exact():
    assert gtilde_step(Constant(0.7), 0.0, 13.7, 0.7, W) == pytest.approx(0.7)


def test_zero_coupling_rotation():
    g0c = 0.4 + 0.3j
    tau = 2.11
    val = gtilde_step(Constant(0.0), 1.0, 1.0 + tau, g0c, W)
    assert abs(val - g0c * np.exp(-1j * W * tau)) < 1e-14


def test_radius_conserved_on_constant_segments():
    c = 0.5
    g0c = 1.2 - 0.4j
    for tau in (0.3, 2.0, 7.7):
        val = gtilde_step(Constant(c), 0.0, tau, g0c, W)
        assert abs(abs(val - c) - abs(g0c - c)) < 1e-12


@pytest.mark.parametrize("form,span,seg", [
    (Constant(0.7), (0.3, 5.1), None),
    (Cosine(0.833, W, 0.0), (0.0, 2 * T), None),
    (Cosine(0.5, 1.3, 0.4), (0.2, 9.0), None),
    (Linear(0.8, 0.1), (1.0, 7.0), (1.0, 7.0)),
    (Linear(0.8, 0.1), (2.0, 5.0), (1.0, 7.0)),
])
def test_closed_form_matches_ode_oracle(form, span, seg):
    t0, t1 = span
    s0, s1 = seg if seg else span
    g0c = 0.3 + 0.5j
    oracle = ode_gtilde(lambda t: form.value_at(t, s0, s1), t0, t1, g0c)
    closed = gtilde_step(form, t0, t1, g0c, W, s0, s1)
    assert abs(oracle - closed) < 1e-10


def test_resonant_drive_closed_form():
    # g = g0 cos(wt), gtilde(0) = g0:
    # gtilde(t) = e^{-iwt} g0 [1 + i w t/2 + (e^{2iwt} - 1)/4]
    g0 = 0.833
    for t in (0.7, T, 2 * T, 3.3 * T):
        closed = gtilde_step(Cosine(g0, W, 0.0), 0.0, t, g0, W)
        formula = np.exp(-1j * W * t) * g0 * (
            1 + 0.5j * W * t + (np.exp(2j * W * t) - 1) / 4)
        assert abs(closed - formula) < 1e-12
    two = gtilde_step(Cosine(g0, W, 0.0), 0.0, 2 * T, g0, W)
    assert abs(abs(two) / g0 - math.sqrt(1 + 4 * math.pi ** 2)) < 1e-12
    four = gtilde_step(Cosine(g0, W, 0.0), 0.0, 4 * T, g0, W)
    assert abs(abs(four) / g0 - math.sqrt(1 + 16 * math.pi ** 2)) < 1e-12


def test_resonant_growth_is_linear_and_quadratic_in_photons():
    g0 = 0.3
    ns = np.arange(1, 7)
    mags = []
    for n in ns:
        val = gtilde_step(Cosine(g0, W, 0.0), 0.0, n * T, g0, W)
        assert abs(abs(val - g0) - g0 * math.pi * n) < 1e-10
        mags.append(abs(val) ** 2)
    coeffs = np.polyfit(ns, mags, 2)
    fit = np.polyval(coeffs, ns)
    ss_res = float(np.sum((mags - fit) ** 2))
    ss_tot = float(np.sum((mags - np.mean(mags)) ** 2))
    assert 1.0 - ss_res / ss_tot > 0.9999


def test_ode_linearity_against_summed_drive():
    # the gtilde equation is affine: the response to g_a + g_b is the sum of
    # the separate responses when the initial values are split accordingly
    form_a = Cosine(0.4, 1.2, 0.3)
    form_b = Constant(0.25)
    ga0, gb0 = 0.1 + 0.2j, -0.3j
    t0, t1 = 0.5, 8.0
    summed = ode_gtilde(
        lambda t: form_a.value_at(t) + form_b.value_at(t), t0, t1, ga0 + gb0)
    parts = (gtilde_step(form_a, t0, t1, ga0, W)
             + gtilde_step(form_b, t0, t1, gb0, W))
    assert abs(summed - parts) < 1e-10


def test_pulse_train_recurrence():
    train = protocols.build_pulse_train_amplification(0.1, 5, "z", omega=W)
    halves = np.arange(1, 11) * T / 2
    traj = gtilde_trajectory(train, sample_times=halves)
    for k, th in enumerate(halves, start=1):
        idx = int(np.argmin(np.abs(traj.times - th)))
        assert abs(abs(traj.gtilde[idx]) - (2 * k + 1) * 0.1) < 1e-10
    assert abs(abs(traj.final.gtilde) - 2.1) < 1e-10


def test_quench_trajectory_circles_origin():
    sch = Schedule(W, (
        Segment(0.0, 2 * T, Constant(0.5), Constant(0.0)),
        Segment(2 * T, 4 * T, Constant(0.0), Constant(0.0)),
    ))
    samples = 2 * T + np.linspace(0.1, 2 * T, 40)
    traj = gtilde_trajectory(sch, sample_times=samples)
    tail = traj.gtilde[np.searchsorted(traj.times, 2 * T + 0.05):]
    np.testing.assert_allclose(np.abs(tail), 0.5, atol=1e-12)


def test_adiabatic_ramp_follows_coupling():
    g0 = 0.833
    sch = Schedule(W, (
        Segment(0.0, 50 * T, Linear(g0, 0.0), Constant(0.0)),
    ))
    samples = np.arange(0, 50 * T, T / 8)
    traj = gtilde_trajectory(sch, sample_times=samples)
    for t, gt in zip(traj.times, traj.gtilde):
        assert abs(gt - sch.g_at(min(t, 50 * T))) < 0.02 * g0


def test_trajectory_continuous_across_pulses():
    train = protocols.build_pulse_train_amplification(0.2, 2, "z", omega=W)
    eps = 1e-7
    for p in train.pulses[1:]:
        before = gtilde_trajectory(train, sample_times=[p.time - eps])
        after = gtilde_trajectory(train, sample_times=[p.time + eps])
        i = int(np.argmin(np.abs(before.times - (p.time - eps))))
        j = int(np.argmin(np.abs(after.times - (p.time + eps))))
        assert abs(before.gtilde[i] - after.gtilde[j]) < 1e-5


def test_dynamical_eigenstate_at_zero_coupling():
    state = dynamical_eigenstate(0.0, 0, +1, 8)
    expected = np.zeros(16, dtype=complex)
    expected[0] = expected[8] = 1 / math.sqrt(2)
    np.testing.assert_allclose(state.amplitudes, expected, atol=1e-14)


def test_dynamical_eigenstate_matches_coherent_assembly():
    # N=0 reproduces the ground eigenstate built from coherent states
    from catamp.fock import coherent_state, tensor_qubit
    gt = 0.6 - 0.3j
    dim = 64
    state = dynamical_eigenstate(gt, 0, -1, dim)
    manual = (tensor_qubit(coherent_state(-gt, dim), (1.0, 0.0)).amplitudes
              - tensor_qubit(coherent_state(gt, dim), (0.0, 1.0)).amplitudes)
    manual /= np.linalg.norm(manual)
    overlap = abs(np.vdot(manual, state.amplitudes))
    assert abs(overlap - 1.0) < 1e-10


def test_dynamical_eigenstates_orthonormal():
    gt = 0.7 + 0.3j
    dim = 64
    states = [dynamical_eigenstate(gt, n, b, dim)
              for n in range(4) for b in (+1, -1)]
    for i, a in enumerate(states):
        for j, b in enumerate(states):
            ov = np.vdot(a.amplitudes, b.amplitudes)
            assert abs(ov - (1.0 if i == j else 0.0)) < 1e-10


def test_sigma_z_matrix_at_zero_coupling():
    m = sigma_z_matrix(0.0, 0.37, n_max=5).matrix
    expected = np.diag([1.0] * 5 + [-1.0] * 5)
    np.testing.assert_allclose(m, expected, atol=1e-13)


def test_sigma_z_matrix_hermitian():
    rng = np.random.default_rng(9)
    for _ in range(4):
        gt = complex(rng.uniform(-3, 3), rng.uniform(-3, 3))
        m = sigma_z_matrix(gt, rng.uniform(0, 10), n_max=12, dim_osc=64).matrix
        assert np.abs(m - m.conj().T).max() < 1e-10


def test_sigma_z_matrix_vacuum_element_pattern():
    gt = 0.9 - 0.2j
    m = sigma_z_matrix(gt, 0.0, n_max=8, dim_osc=64)
    expected = math.exp(-2.0 * abs(gt / W) ** 2)
    assert abs(m.block(+1, +1)[0, 0] - expected) < 1e-10
    assert abs(m.block(-1, -1)[0, 0] + expected) < 1e-10


def test_sigma_z_matrix_against_basis_oracle():
    # independent construction: B^dag (sigma_z x I) B with explicit basis
    gt = 0.8 + 0.5j
    t = 1.3
    n_max, dim = 10, 64
    basis = frame_basis(gt, t, n_max, dim)
    sz_full = np.kron(SIGMA_Z, np.eye(dim))
    oracle = basis.conj().T @ sz_full @ basis
    m = sigma_z_matrix(gt, t, n_max, dim).matrix
    assert np.abs(m - oracle).max() < 1e-10


def test_first_order_propagator_identity_at_zero_delta():
    sch = Schedule(W, (Segment(0.0, 2 * T, Constant(0.5), Constant(0.0)),))
    j = first_order_propagator(sch, None, 2 * T, n_max=8, dim_osc=32)
    np.testing.assert_allclose(j, np.eye(16), atol=1e-12)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_first_order_echo_identity(k):
    sch = Schedule(W, (
        Segment(0.0, k * T, Constant(0.833), Constant(0.1)),
        Segment(k * T, 2 * k * T, Constant(0.833), Constant(-0.1)),
    ))
    j = first_order_propagator(sch, None, 2 * k * T, n_max=16, dim_osc=64)
    assert np.abs(j - np.eye(32)).max() < 1e-8


def test_first_order_propagator_unitary():
    sch = Schedule(W, (Segment(0.0, 3 * T, Cosine(0.4, W, 0.0), Constant(0.2)),))
    j = first_order_propagator(sch, None, 3 * T, n_max=12, dim_osc=64)
    assert np.abs(j @ j.conj().T - np.eye(24)).max() < 1e-8


def test_expand_eigenstate_gives_unit_vector():
    gt = 0.5 + 0.1j
    state = dynamical_eigenstate(gt, 0, +1, 64)
    coeffs = expand_in_frame(state, gt, 0.0, n_max=8)
    expected = np.zeros(16)
    expected[0] = 1.0
    np.testing.assert_allclose(coeffs.entries, expected, atol=1e-10)
    assert coeffs.residual < 1e-10


def test_expand_round_trip():
    rng = np.random.default_rng(21)
    n_max, dim = 10, 64
    raw = rng.standard_normal(2 * n_max) + 1j * rng.standard_normal(2 * n_max)
    raw /= np.linalg.norm(raw)
    coeffs = CoefficientVector(raw, n_max)
    gt = 0.4 - 0.6j
    state = assemble_from_frame(coeffs, gt, 0.9, dim)
    back = expand_in_frame(state, gt, 0.9, n_max)
    np.testing.assert_allclose(back.entries, raw, atol=1e-10)
    assert abs(analysis.fidelity(
        assemble_from_frame(back, gt, 0.9, dim), state) - 1.0) < 1e-10


def test_expand_incomplete_basis_raises():
    state = dynamical_eigenstate(0.0, 12, +1, 32)
    with pytest.raises(IncompleteBasisError) as err:
        expand_in_frame(state, 0.0, 0.0, n_max=4)
    assert err.value.residual > 0.9


def test_coefficients_constant_at_zero_delta():
    # full numeric propagation as oracle: in the Delta -> 0 limit the frame
    # coefficients stay fixed while the basis carries all dynamics
    dim = 64
    g0 = 0.4
    sch = Schedule(W, (Segment(0.0, 2 * T, Constant(g0), Constant(0.0)),))
    s0 = dynamical_eigenstate(g0, 0, +1, dim)
    s1 = dynamical_eigenstate(g0, 1, -1, dim)
    init = SystemState((s0.amplitudes * 0.8 + s1.amplitudes * 0.6), dim,
                       dim_qubit=2)
    c_init = expand_in_frame(init, g0, 0.0, n_max=16)
    for t in (0.5 * T, T, 1.7 * T):
        evolved = propagator.evolve(init, sch, t1=t, steps_per_period=256)
        coeffs = expand_in_frame(evolved, g0, t, n_max=16)
        drift = np.abs(np.abs(coeffs.entries) - np.abs(c_init.entries)).max()
        assert drift < 1e-6


def test_predict_state_matches_full_numerics():
    dim = 64
    g0 = 0.4
    sch = Schedule(W, (Segment(0.0, 2 * T, Cosine(g0, W, 0.0), Constant(0.0)),))
    init = dynamical_eigenstate(g0, 0, +1, dim)
    num = propagator.evolve(init, sch, steps_per_period=512)
    pred = frame.predict_state(sch, sch.t_final, dim, n_max=32,
                               initial_state=init)
    assert analysis.fidelity(num, pred) > 1.0 - 1e-7


def test_first_order_prediction_beats_zeroth_order():
    # quench setting: the coupling is off while the state remains displaced,
    # so sigma_z dephases the two branches and the first-order propagator has
    # a nontrivial job to do
    dim = 64
    delta = 0.05
    sch = Schedule(W, (Segment(0.0, 3 * T, Constant(0.0), Constant(delta)),))
    init = dynamical_eigenstate(0.833, 0, +1, dim)
    num = propagator.evolve(init, sch, steps_per_period=256)
    plain = frame.predict_state(sch, sch.t_final, dim, n_max=32,
                                initial_state=init)
    first = frame.predict_state(sch, sch.t_final, dim, n_max=32,
                                initial_state=init, first_order=True)
    assert (1 - analysis.fidelity(num, plain)) > 0.05
    assert (1 - analysis.fidelity(num, first)) < 0.1 * (
        1 - analysis.fidelity(num, plain))
