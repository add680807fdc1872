import math

import numpy as np
import pytest

from _util import amp_fidelity, projected, undo_pulses
from catamp import fock, frame, propagator, protocols
from catamp.model import Cosine, HamiltonianParams
from catamp.protocols import (build_echo, build_pulse_train_amplification,
                              build_sinusoidal_amplification, chain,
                              speedup_estimate)

W = 1.0
T = 2.0 * math.pi


def test_sinusoidal_builder_shape_and_metadata():
    for n in (2, 4):
        sch = build_sinusoidal_amplification(0.833, n, delta=0.1)
        assert sch.t_final == pytest.approx(n * T)
        assert isinstance(sch.segments[0].g_form, Cosine)
        predicted = sch.metadata["predicted_gtilde_abs"]
        assert predicted == pytest.approx(
            0.833 * math.sqrt(1 + (n * math.pi) ** 2))
        traj = frame.gtilde_trajectory(sch)
        assert abs(abs(traj.final.gtilde) - predicted) < 1e-10
    two = build_sinusoidal_amplification(0.833, 2)
    assert two.metadata["predicted_gtilde_abs"] == pytest.approx(5.2998, abs=2e-4)
    four = build_sinusoidal_amplification(0.833, 4)
    assert four.metadata["predicted_gtilde_abs"] == pytest.approx(10.5, abs=1e-3)


def test_sinusoidal_zero_periods_is_identity():
    sch = build_sinusoidal_amplification(0.4, 0)
    assert sch.t_final == 0.0
    traj = frame.gtilde_trajectory(sch)
    assert abs(traj.final.gtilde - 0.4) < 1e-14


def test_sinusoidal_rejects_odd_fractions():
    with pytest.raises(ValueError):
        build_sinusoidal_amplification(0.4, 1.3)
    build_sinusoidal_amplification(0.4, 1.5)  # half-integers allowed


def test_pulse_train_metadata_matches_trajectory():
    for axis in ("z", "y"):
        sch = build_pulse_train_amplification(0.1, 5, axis, delta=0.1)
        assert len(sch.pulses) == 10
        traj = frame.gtilde_trajectory(sch)
        assert abs(abs(traj.final.gtilde)
                   - sch.metadata["predicted_gtilde_abs"]) < 1e-10
        assert sch.metadata["predicted_gtilde_abs"] == pytest.approx(0.21 * W * 10)


def test_pulse_train_starting_late_reaches_less():
    sch = build_pulse_train_amplification(0.1, 5, "z",
                                          first_pulse_at_periods=0.5)
    assert sch.metadata["predicted_gtilde_abs"] == pytest.approx(1.9)
    traj = frame.gtilde_trajectory(sch)
    assert abs(abs(traj.final.gtilde) - 1.9) < 1e-10


def test_pulse_train_rejects_x_axis():
    with pytest.raises(ValueError, match="flips the sign of g"):
        build_pulse_train_amplification(0.1, 5, "x")


def test_pulse_train_rejects_mismatched_interval():
    with pytest.raises(ValueError, match="divide"):
        build_pulse_train_amplification(0.1, 5, "z", interval_periods=0.7)


def test_echo_builder_pulse_placement():
    one = build_echo(10, 1, g0=0.5, delta=0.1)
    assert [p.time for p in one.pulses] == [pytest.approx(5 * T)]
    four = build_echo(10, 4, g0=0.5, delta=0.1)
    assert [p.time for p in four.pulses] == [
        pytest.approx(k * T) for k in (2, 4, 6, 8)]
    assert all(p.axis == "x" for p in four.pulses)
    none = build_echo(10, 0, g0=0.5, delta=0.1)
    assert none.pulses == ()


def test_echo_builder_rejects_uneven_split():
    with pytest.raises(ValueError, match="equal"):
        build_echo(10, 3, g0=0.5, delta=0.1)
    with pytest.raises(ValueError):
        build_echo(0, 1, g0=0.5, delta=0.1)


def test_speedup_estimate_reference_case():
    omega = 2 * math.pi * 10e9
    chi = 2 * math.pi * 2.4e6
    ratio = speedup_estimate(omega, chi, 2)
    assert 0.9e3 < ratio < 1.2e3
    assert ratio == pytest.approx(1041.666, rel=1e-5)


def test_speedup_estimate_crossover_and_scaling():
    # ratio 1 when pi/chi equals n 2pi/omega, i.e. chi = omega/(2n)
    omega = 1.0
    n = 3.0
    assert speedup_estimate(omega, omega / (2 * n), n) == pytest.approx(1.0)
    assert speedup_estimate(omega, 0.01, n) == pytest.approx(
        2 * speedup_estimate(omega, 0.01, 2 * n))
    with pytest.raises(ValueError):
        speedup_estimate(-1.0, 0.1, 1)


def test_chain_preserves_cosine_shape_and_pulses():
    drive = build_sinusoidal_amplification(0.5, 2, delta=0.1)
    echo = build_echo(4, 1, g0=0.5, delta=0.1)
    full = chain(drive, echo)
    assert full.t_final == pytest.approx(6 * T)
    # g is continuous at the boundary: cos ends at g0, echo holds g0
    assert full.g_at(2 * T - 1e-9) == pytest.approx(0.5, abs=1e-6)
    assert full.g_at(2 * T + 1e-9) == pytest.approx(0.5)
    assert [p.time for p in full.pulses] == [pytest.approx(4 * T)]
    # chaining a shifted cosine keeps values identical to the unshifted form
    shifted = chain(echo, drive)
    for t in np.linspace(0, 2 * T, 17):
        assert shifted.g_at(4 * T + t) == pytest.approx(drive.g_at(t), abs=1e-12)


def _echo_fidelity(psi_b, drive, cat_b, n_pulses, g0, delta, dim, total=30):
    echo = build_echo(total, n_pulses, g0=g0, delta=delta)
    full = chain(drive, echo)
    psi = propagator.evolve(psi_b, full, t0=drive.t_final,
                            steps_per_period=256)
    return amp_fidelity(projected(undo_pulses(psi, full)), cat_b)


def test_echo_efficacy_structure():
    """Rephasing structure of the equal-interval sigma_x echo.

    Odd pulse counts pair the Delta-sign intervals exactly, so the
    first-order dephasing cancels and the fidelity returns near the
    amplified value.  Even counts leave one unpaired interval whose length
    shrinks as the count grows, so fidelity improves with more pulses but
    stays below the odd-count plateau.
    """
    g0, delta, dim = 0.5, 0.1, 64
    gs = propagator.ground_state(HamiltonianParams(g0, delta, W, dim))
    drive = build_sinusoidal_amplification(g0, 1, delta=delta)
    psi_b = propagator.evolve(gs, drive, steps_per_period=256)
    gt = frame.gtilde_at(drive, drive.t_final)
    cat_b = fock.cat_state(gt / W, +1, dim)

    fid = {n: _echo_fidelity(psi_b, drive, cat_b, n, g0, delta, dim)
           for n in (0, 1, 2, 4, 5)}
    # any echo beats free dephasing
    for n in (1, 2, 4, 5):
        assert fid[n] > fid[0] + 0.05
    # even counts: shorter unpaired interval, better fidelity
    assert fid[4] > fid[2]
    # odd counts rephase almost completely
    assert fid[1] > 0.95 and fid[5] > 0.95
