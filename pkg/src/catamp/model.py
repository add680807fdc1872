"""Qubit-oscillator Hamiltonian with time-dependent coupling, and the
declarative Schedule of g(t), Delta(t) and instantaneous pi-pulses.

H(t) = -(Delta/2) sigma_z + omega (a^dag a + 1/2) + g(t) sigma_x (a^dag + a)

in units of hbar = 1.  In the sigma_x eigenbasis used throughout (ordered
|+>_x, |->_x), sigma_x is diagonal and sigma_z is the off-diagonal swap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Union

import numpy as np

from .fock import DimensionError, SystemState, TruncatedOperator, ladder

# Pauli operators in the sigma_x eigenbasis, ordered (|+>_x, |->_x).
SIGMA_X = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, 1.0j], [-1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI = {"x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z}

_TIME_TOL = 1e-9


class ScheduleError(ValueError):
    """Raised when a Schedule violates coverage or ordering invariants."""


@dataclass(frozen=True)
class Constant:
    value: float

    def value_at(self, t, t0=0.0, t1=0.0):
        return self.value

    def flipped(self) -> "Constant":
        return Constant(-self.value)


@dataclass(frozen=True)
class Cosine:
    """amplitude * cos(frequency * t + phase), with t absolute."""

    amplitude: float
    frequency: float
    phase: float = 0.0

    def value_at(self, t, t0=0.0, t1=0.0):
        return self.amplitude * np.cos(self.frequency * t + self.phase)

    def flipped(self) -> "Cosine":
        return Cosine(-self.amplitude, self.frequency, self.phase)


@dataclass(frozen=True)
class Linear:
    """Linear interpolation from v0 at the segment start to v1 at its end."""

    v0: float
    v1: float

    def value_at(self, t, t0, t1):
        if t1 <= t0:
            return self.v0
        return self.v0 + (self.v1 - self.v0) * (t - t0) / (t1 - t0)

    def flipped(self) -> "Linear":
        return Linear(-self.v0, -self.v1)


Form = Union[Constant, Cosine, Linear]


@dataclass(frozen=True)
class Segment:
    t_start: float
    t_end: float
    g_form: Form
    delta_form: Form

    def g_at(self, t: float) -> float:
        return float(self.g_form.value_at(t, self.t_start, self.t_end))

    def delta_at(self, t: float) -> float:
        return float(self.delta_form.value_at(t, self.t_start, self.t_end))


@dataclass(frozen=True)
class Pulse:
    time: float
    axis: str

    def __post_init__(self):
        if self.axis not in PAULI:
            raise ScheduleError(f"pulse axis must be x, y or z, got {self.axis!r}")


@dataclass(frozen=True)
class Schedule:
    """Piecewise g(t)/Delta(t) plus instantaneous pi-pulse events.

    Segments must be contiguous, non-overlapping and cover [0, t_final].
    Pulse times must lie within [0, t_final]; coincident pulses are rejected.
    Evaluation is pure: pulses do not alter g_at/delta_at, they are separate
    events interpreted by the propagator (as Pauli unitaries) and by the
    analytic frame (as sign flips of the effective parameters).
    """

    omega: float
    segments: tuple
    pulses: tuple = ()
    metadata: Mapping = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        object.__setattr__(self, "pulses", tuple(self.pulses))
        if self.omega <= 0 or not math.isfinite(self.omega):
            raise ScheduleError(f"omega must be positive and finite, got {self.omega}")
        if not self.segments:
            raise ScheduleError("schedule needs at least one segment")
        degenerate = len(self.segments) == 1 and (
            self.segments[0].t_end == self.segments[0].t_start
        )
        prev_end = 0.0
        for i, seg in enumerate(self.segments):
            if abs(seg.t_start - prev_end) > _TIME_TOL:
                raise ScheduleError(
                    f"segment {i} starts at {seg.t_start}, expected {prev_end} "
                    "(segments must be contiguous from t=0)"
                )
            if seg.t_end < seg.t_start - _TIME_TOL or (
                seg.t_end <= seg.t_start and not degenerate
            ):
                raise ScheduleError(
                    f"segment {i} spans [{seg.t_start}, {seg.t_end}]: "
                    "empty or overlapping"
                )
            prev_end = seg.t_end
        times = sorted(p.time for p in self.pulses)
        for i, tp in enumerate(times):
            if tp < -_TIME_TOL or tp > self.t_final + _TIME_TOL:
                raise ScheduleError(f"pulse at t={tp} outside [0, {self.t_final}]")
            if i > 0 and tp - times[i - 1] <= _TIME_TOL:
                raise ScheduleError(f"simultaneous pulses at t={tp}")

    @property
    def t_final(self) -> float:
        return self.segments[-1].t_end

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.omega

    def segment_at(self, t: float) -> Segment:
        if t < -_TIME_TOL or t > self.t_final + _TIME_TOL:
            raise ScheduleError(f"t={t} outside schedule span [0, {self.t_final}]")
        for seg in self.segments:
            if t <= seg.t_end + _TIME_TOL:
                return seg
        return self.segments[-1]

    def g_at(self, t: float) -> float:
        return self.segment_at(t).g_at(t)

    def delta_at(self, t: float) -> float:
        return self.segment_at(t).delta_at(t)

    def sorted_pulses(self) -> tuple:
        return tuple(sorted(self.pulses, key=lambda p: p.time))


@dataclass(frozen=True)
class HamiltonianParams:
    g: float
    delta: float
    omega: float
    dim_osc: int

    def __post_init__(self):
        if self.dim_osc < 2:
            raise DimensionError(f"dim_osc must be >= 2, got {self.dim_osc}")
        for name in ("g", "delta", "omega"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")


def hamiltonian_at(params: HamiltonianParams) -> TruncatedOperator:
    """Dense H = -(Delta/2) sigma_z + omega (n + 1/2) + g sigma_x (a^dag + a)."""
    d = params.dim_osc
    a, adag = ladder(d)
    x = a.entries + adag.entries
    n_half = np.diag(np.arange(d) + 0.5).astype(complex)
    eye = np.eye(d)
    h = (
        -0.5 * params.delta * np.kron(SIGMA_Z, eye)
        + params.omega * np.kron(np.eye(2), n_half)
        + params.g * np.kron(SIGMA_X, x)
    )
    return TruncatedOperator(h, d, dim_qubit=2, hermitian=True)


def apply_pulse(state: SystemState, axis: str) -> SystemState:
    """Apply an instantaneous pi-pulse (Pauli on the qubit factor)."""
    if state.dim_qubit != 2:
        raise DimensionError("pi-pulses act on full qubit-oscillator states")
    if axis not in PAULI:
        raise ValueError(f"pulse axis must be x, y or z, got {axis!r}")
    blocks = PAULI[axis] @ state.qubit_blocks()
    return SystemState(
        blocks.reshape(-1),
        state.dim_osc,
        dim_qubit=2,
        leakage=state.leakage,
        normalized=state.normalized,
    )


def effective_flips(axis: str):
    """(flip_g, flip_delta) realized by conjugating H with the given Pauli.

    sigma_z anticommutes with the sigma_x coupling term, so it flips g;
    sigma_x flips Delta; sigma_y flips both.
    """
    table = {"z": (True, False), "x": (False, True), "y": (True, True)}
    if axis not in table:
        raise ValueError(f"pulse axis must be x, y or z, got {axis!r}")
    return table[axis]
