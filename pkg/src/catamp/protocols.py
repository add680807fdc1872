"""Builders for the named experiments: sinusoidal cat amplification,
half-period pi-pulse-train amplification, spin-echo rephasing, and the
dispersive-protocol speedup estimate.

Builders emit Schedule values (plus predicted-frame metadata); they never run
simulations.  All builders take rates in rad/s and durations in oscillator
periods T = 2 pi / omega.
"""

from __future__ import annotations

import cmath
import math

from .model import Constant, Cosine, Pulse, Schedule, Segment, effective_flips

_HALF_STEP_TOL = 1e-9


def _is_half_integer(x: float) -> bool:
    return abs(2.0 * x - round(2.0 * x)) < _HALF_STEP_TOL


def build_sinusoidal_amplification(g0: float, n_periods: float, *,
                                   delta: float = 0.0,
                                   omega: float = 1.0) -> Schedule:
    """Resonant drive g(t) = g0 cos(omega t) over n_periods oscillator periods.

    On resonance the driven-oscillator solution gives
    |gtilde(nT)| = g0 sqrt(1 + (n pi)^2), attached as metadata.
    """
    if n_periods < 0 or not _is_half_integer(n_periods):
        raise ValueError(
            f"n_periods must be a non-negative integer or half-integer, "
            f"got {n_periods}"
        )
    t_final = n_periods * 2.0 * math.pi / omega
    segments = (
        Segment(0.0, t_final, Cosine(g0, omega, 0.0), Constant(delta)),
    )
    predicted = abs(g0) * math.sqrt(1.0 + (n_periods * math.pi) ** 2)
    return Schedule(
        omega, segments,
        metadata={"protocol": "sinusoidal", "predicted_gtilde_abs": predicted},
    )


def build_pulse_train_amplification(g0: float, n_periods: float, axis: str, *,
                                    delta: float = 0.0, omega: float = 1.0,
                                    interval_periods: float = 0.5,
                                    first_pulse_at_periods: float = 0.0) -> Schedule:
    """Constant g with sign flips driven by a pi-pulse train.

    sigma_z pulses amplify without rephasing; sigma_y pulses flip Delta as
    well and rephase while amplifying.  sigma_x does not flip g and is
    rejected.  The default train (every T/2 from t = 0) reaches
    |gtilde(nT)| = (4n + 1) g0; trains starting at T/2 reach (4n - 1) g0.
    """
    if axis not in ("z", "y"):
        flip_g, _ = effective_flips(axis)
        raise ValueError(
            f"axis {axis!r} cannot amplify: the pulse train needs a Pauli "
            "that flips the sign of g (z or y)"
        )
    if n_periods <= 0:
        raise ValueError(f"n_periods must be positive, got {n_periods}")
    if interval_periods <= 0:
        raise ValueError(f"pulse interval must be positive, got {interval_periods}")
    period = 2.0 * math.pi / omega
    total = n_periods * period
    n_intervals = (n_periods - first_pulse_at_periods) / interval_periods
    if abs(n_intervals - round(n_intervals)) > 1e-9:
        raise ValueError(
            "pulse interval must divide the span from the first pulse to the "
            "total duration"
        )
    times = []
    k = 0
    while True:
        tp = (first_pulse_at_periods + k * interval_periods) * period
        if tp >= total - 1e-12 * period:
            break
        times.append(tp)
        k += 1
    segments = (Segment(0.0, total, Constant(g0), Constant(delta)),)
    pulses = tuple(Pulse(tp, axis) for tp in times)
    predicted = _pulse_train_gtilde(g0, omega, total, times)
    return Schedule(
        omega, segments, pulses,
        metadata={"protocol": "pulse_train", "axis": axis,
                  "predicted_gtilde_abs": predicted},
    )


def _pulse_train_gtilde(g0: float, omega: float, t_final: float, times) -> float:
    """|gtilde(t_final)| from the bare flip recurrence (metadata cross-check).

    Between flips the frame coupling circles the effective constant value:
    gtilde -> c + (gtilde - c) e^{-i omega dt}.  Independent of the trajectory
    module on purpose.
    """
    gt = complex(g0)
    sign = 1.0
    t_prev = 0.0
    for tp in list(times) + [t_final]:
        c = sign * g0
        gt = c + (gt - c) * cmath.exp(-1j * omega * (tp - t_prev))
        t_prev = tp
        if tp < t_final:
            sign = -sign
    return abs(gt)


def build_echo(free_periods: int, n_pulses: int = 1, *, g0: float,
               delta: float, omega: float = 1.0) -> Schedule:
    """Free evolution with sigma_x pulses at equally spaced interval boundaries.

    The first-order dephasing integral cancels only over whole oscillator
    periods per Delta sign, so free_periods must split into n_pulses + 1 equal
    integer-period intervals.  n_pulses = 0 gives the plain dephasing control.
    """
    if free_periods <= 0 or free_periods != int(free_periods):
        raise ValueError(f"free_periods must be a positive integer, got {free_periods}")
    if n_pulses < 0:
        raise ValueError(f"n_pulses must be >= 0, got {n_pulses}")
    chunk = free_periods / (n_pulses + 1)
    if abs(chunk - round(chunk)) > 1e-12 or round(chunk) < 1:
        raise ValueError(
            f"{free_periods} periods do not divide into {n_pulses + 1} equal "
            "integer-period intervals; the rephasing argument needs whole "
            "periods per Delta sign"
        )
    period = 2.0 * math.pi / omega
    total = free_periods * period
    pulses = tuple(
        Pulse(k * round(chunk) * period, "x") for k in range(1, n_pulses + 1)
    )
    segments = (Segment(0.0, total, Constant(g0), Constant(delta)),)
    return Schedule(
        omega, segments, pulses,
        metadata={"protocol": "echo", "n_pulses": n_pulses},
    )


def speedup_estimate(omega: float, chi_qs: float, n_periods: float) -> float:
    """(pi / chi_qs) / (n_periods 2 pi / omega).

    Ratio of the dispersive-protocol floor time to this protocol's duration;
    ~1e3 for a 10 GHz oscillator against chi_qs/2pi = 2.4 MHz and 2 periods.
    """
    if omega <= 0 or chi_qs <= 0 or n_periods <= 0:
        raise ValueError("omega, chi_qs and n_periods must all be positive")
    t_ref = math.pi / chi_qs
    t_ours = n_periods * 2.0 * math.pi / omega
    return t_ref / t_ours


def chain(first: Schedule, second: Schedule) -> Schedule:
    """Concatenate two schedules, shifting the second to start at first.t_final.

    Cosine forms keep their shape: the phase is rebased so the shifted segment
    evaluates to the same values relative to its own start.
    """
    if first.omega != second.omega:
        raise ValueError("cannot chain schedules with different omega")
    shift = first.t_final

    def move(form):
        if isinstance(form, Cosine):
            return Cosine(form.amplitude, form.frequency,
                          form.phase - form.frequency * shift)
        return form

    segments = list(first.segments)
    for seg in second.segments:
        if seg.t_end == seg.t_start:
            continue
        segments.append(
            Segment(seg.t_start + shift, seg.t_end + shift,
                    move(seg.g_form), move(seg.delta_form))
        )
    pulses = list(first.pulses) + [
        Pulse(p.time + shift, p.axis) for p in second.pulses
    ]
    meta = dict(first.metadata)
    meta.update(second.metadata)
    return Schedule(first.omega, tuple(segments), tuple(pulses), metadata=meta)
