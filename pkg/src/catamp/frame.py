"""Analytic frame for the zero-qubit-frequency limit: the complex frame
coupling gtilde(t), dynamical-evolution eigenstates, accumulated phases, the
sigma_z coefficient matrix, and the first-order coefficient propagator.

gtilde obeys d(gtilde)/dt = i omega (g(t) - gtilde(t)) and is updated in
closed form per schedule segment.  The basis states

    |B_{N,b}(t)> = e^{-i N omega t} (|+>_x D(-gtilde/w)|N> + b |->_x D(+gtilde/w)|N>) / sqrt(2)

are orthonormal for every gtilde; a state prepared as |B_{N,b}(0)> evolves to
e^{i phi_global(t)} |B_{N,b}(t)> when Delta -> 0.  The N-independent global
phase phi_global = integral(g Re[gtilde]/w - w/2) dt is tracked for
completeness but drops out of all fidelities.

Pi-pulses never make gtilde jump; they flip the sign of the effective g (and
Delta) seen by the frame from the pulse time onward, while the pulse unitaries
themselves accumulate into a qubit-operator prefix returned by
``pulse_product``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.integrate import quad

from .fock import SystemState, displacement
from .model import PAULI, Constant, Cosine, Linear, Schedule, effective_flips

COEFF_RESIDUAL_TOL = 1e-8
_UNITARITY_TOL = 1e-8


class IncompleteBasisError(ValueError):
    """Raised when a state cannot be represented in the truncated frame basis."""

    def __init__(self, residual: float, n_max: int):
        self.residual = residual
        super().__init__(
            f"frame expansion up to n_max={n_max} leaves residual norm "
            f"{residual:.3e}"
        )


class NonUnitaryError(RuntimeError):
    """Internal consistency failure: a propagator came out non-unitary."""


@dataclass(frozen=True)
class DynamicalFrame:
    """Frame coupling gtilde and global phase at one instant."""

    gtilde: complex
    time: float
    phi_global: float


@dataclass(frozen=True)
class FrameTrajectory:
    times: np.ndarray
    gtilde: np.ndarray
    phi_global: np.ndarray
    omega: float

    @property
    def final(self) -> DynamicalFrame:
        return DynamicalFrame(
            complex(self.gtilde[-1]), float(self.times[-1]), float(self.phi_global[-1])
        )

    def csv_rows(self):
        """Rows of (t/T, Re gtilde/w, Im gtilde/w, |gtilde|/w)."""
        period = 2.0 * math.pi / self.omega
        for t, g in zip(self.times, self.gtilde):
            yield (t / period, g.real / self.omega, g.imag / self.omega,
                   abs(g) / self.omega)


@dataclass(frozen=True)
class CoefficientVector:
    """Frame coefficients C_{N,b}, ordered (0+, 1+, ..., 0-, 1-, ...)."""

    entries: np.ndarray
    n_max: int
    residual: float = 0.0

    def __post_init__(self):
        vec = np.asarray(self.entries, dtype=complex)
        object.__setattr__(self, "entries", vec)
        if vec.shape != (2 * self.n_max,):
            raise ValueError(
                f"coefficient vector of shape {vec.shape} needs length 2*n_max"
            )

    @property
    def branch_plus(self) -> np.ndarray:
        return self.entries[: self.n_max]

    @property
    def branch_minus(self) -> np.ndarray:
        return self.entries[self.n_max :]


@dataclass(frozen=True)
class SigmaZMatrix:
    """sigma_z in the frame basis at time t, Hermitian by construction."""

    matrix: np.ndarray
    n_max: int
    time: float
    gtilde: complex

    def block(self, row_branch: int, col_branch: int) -> np.ndarray:
        r = 0 if row_branch > 0 else self.n_max
        c = 0 if col_branch > 0 else self.n_max
        return self.matrix[r : r + self.n_max, c : c + self.n_max]


def _eint(mu: float, t0: float, t1: float) -> complex:
    """integral of e^{i mu t} dt over [t0, t1], stable through mu -> 0."""
    tau = t1 - t0
    return tau * cmath.exp(1j * mu * (t0 + t1) / 2) * np.sinc(mu * tau / (2 * math.pi))


def _teint(mu: float, t0: float, t1: float) -> complex:
    """integral of t e^{i mu t} dt over [t0, t1] for mu != 0."""
    imu = 1j * mu
    return (t1 * cmath.exp(imu * t1) - t0 * cmath.exp(imu * t0)) / imu - _eint(
        mu, t0, t1
    ) / imu


def gtilde_step(form, t0: float, t1: float, gtilde0: complex, omega: float,
                form_t0: float | None = None, form_t1: float | None = None) -> complex:
    """Closed-form gtilde update across [t0, t1] for one coupling form.

    ``form_t0``/``form_t1`` give the bounds of the segment the form belongs to
    (needed by Linear when stepping over part of a segment); they default to
    [t0, t1].
    """
    if form_t0 is None:
        form_t0 = t0
    if form_t1 is None:
        form_t1 = t1
    tau = t1 - t0
    if tau < 0:
        raise ValueError(f"time step must run forward, got [{t0}, {t1}]")
    if tau == 0.0:
        return complex(gtilde0)
    w = omega
    if isinstance(form, Constant):
        drive = form.value * _eint(w, t0, t1)
    elif isinstance(form, Cosine):
        half = form.amplitude / 2.0
        drive = half * (
            cmath.exp(1j * form.phase) * _eint(w + form.frequency, t0, t1)
            + cmath.exp(-1j * form.phase) * _eint(w - form.frequency, t0, t1)
        )
    elif isinstance(form, Linear):
        span = form_t1 - form_t0
        slope = 0.0 if span == 0 else (form.v1 - form.v0) / span
        drive = (form.v0 - slope * form_t0) * _eint(w, t0, t1) + slope * _teint(
            w, t0, t1
        )
    else:
        raise TypeError(f"unsupported coupling form {form!r}")
    return cmath.exp(-1j * w * tau) * complex(gtilde0) + cmath.exp(
        -1j * w * t1
    ) * (1j * w * drive)


def phi_global_step(form, t0: float, t1: float, gtilde0: complex, omega: float,
                    form_t0: float | None = None,
                    form_t1: float | None = None) -> float:
    """Increment of the N-independent phase over [t0, t1].

    The Appendix-A integrand Im[i(gtilde*-g)g]/w + g^2/w - w/2 simplifies to
    g Re[gtilde]/w - w/2; the smooth integrand is evaluated on the closed-form
    gtilde and integrated adaptively.
    """
    if form_t0 is None:
        form_t0 = t0
    if form_t1 is None:
        form_t1 = t1
    if t1 == t0:
        return 0.0

    def integrand(t):
        g = form.value_at(t, form_t0, form_t1)
        gt = gtilde_step(form, t0, t, gtilde0, omega, form_t0, form_t1)
        return g * gt.real / omega - omega / 2.0

    periods = (t1 - t0) * omega / (2 * math.pi)
    val, _ = quad(integrand, t0, t1, epsabs=1e-12, epsrel=1e-12,
                  limit=max(200, int(50 * periods) + 50))
    return float(val)


@dataclass(frozen=True)
class EffectiveInterval:
    """Pulse-free stretch with the sign-flipped parameters the frame sees."""

    t0: float
    t1: float
    g_form: object
    delta_form: object
    seg_t0: float
    seg_t1: float
    sign_g: int
    sign_delta: int

    def effective_g_form(self):
        return self.g_form if self.sign_g > 0 else self.g_form.flipped()

    def effective_delta_form(self):
        return self.delta_form if self.sign_delta > 0 else self.delta_form.flipped()


def effective_intervals(schedule: Schedule, t_end: float | None = None):
    """Split [0, t_end] at segment boundaries and pulses, tracking sign flips.

    A pulse at time tp affects all intervals starting at or after tp; a pulse
    exactly at t=0 therefore flips the very first interval.
    """
    if t_end is None:
        t_end = schedule.t_final
    cuts = {0.0, t_end}
    for seg in schedule.segments:
        if 0.0 < seg.t_start < t_end:
            cuts.add(seg.t_start)
        if 0.0 < seg.t_end < t_end:
            cuts.add(seg.t_end)
    pulses = [p for p in schedule.sorted_pulses() if p.time < t_end]
    for p in pulses:
        if 0.0 < p.time:
            cuts.add(p.time)
    edges = sorted(cuts)
    sign_g, sign_delta = 1, 1
    pulse_idx = 0
    out = []
    for left, right in zip(edges[:-1], edges[1:]):
        while pulse_idx < len(pulses) and pulses[pulse_idx].time <= left + 1e-12:
            flip_g, flip_d = effective_flips(pulses[pulse_idx].axis)
            if flip_g:
                sign_g = -sign_g
            if flip_d:
                sign_delta = -sign_delta
            pulse_idx += 1
        seg = schedule.segment_at((left + right) / 2.0)
        out.append(
            EffectiveInterval(
                left, right, seg.g_form, seg.delta_form,
                seg.t_start, seg.t_end, sign_g, sign_delta,
            )
        )
    return out


def pulse_product(schedule: Schedule, t_end: float | None = None) -> np.ndarray:
    """Product of the pulse Paulis crossed in [0, t_end), latest leftmost.

    Evolving the full Schroedinger equation with pulses equals this operator
    (on the qubit factor) applied after the flip-sign effective evolution.
    """
    if t_end is None:
        t_end = schedule.t_final
    op = np.eye(2, dtype=complex)
    for p in schedule.sorted_pulses():
        if p.time < t_end:
            op = PAULI[p.axis] @ op
    return op


def gtilde_trajectory(schedule: Schedule, gtilde0: complex | None = None,
                      sample_times: Sequence[float] | None = None,
                      with_phase: bool = False) -> FrameTrajectory:
    """Piecewise closed-form trajectory of gtilde (continuous in t).

    gtilde(0) defaults to g(0), which makes the initial dynamical eigenstates
    coincide with the energy eigenstates.  Sample times must lie within the
    schedule span; interval boundaries are always included.
    """
    if gtilde0 is None:
        gtilde0 = schedule.g_at(0.0)
    intervals = effective_intervals(schedule)
    t_final = schedule.t_final
    if sample_times is None:
        samples = []
    else:
        samples = sorted(float(t) for t in sample_times)
        if samples and (samples[0] < -1e-12 or samples[-1] > t_final + 1e-12):
            raise ValueError("sample times outside schedule span")
    times = [0.0]
    values = [complex(gtilde0)]
    phases = [0.0]
    idx = 0
    g_cur = complex(gtilde0)
    phi_cur = 0.0
    for iv in intervals:
        form = iv.effective_g_form()
        inside = []
        while idx < len(samples) and samples[idx] <= iv.t1 + 1e-12:
            if samples[idx] > iv.t0 + 1e-12:
                inside.append(min(samples[idx], iv.t1))
            idx += 1
        if not inside or inside[-1] < iv.t1:
            inside.append(iv.t1)
        for t in inside:
            times.append(t)
            values.append(gtilde_step(form, iv.t0, t, g_cur, schedule.omega,
                                      iv.seg_t0, iv.seg_t1))
            if with_phase:
                phases.append(phi_cur + phi_global_step(
                    form, iv.t0, t, g_cur, schedule.omega, iv.seg_t0, iv.seg_t1))
            else:
                phases.append(0.0)
        g_cur = values[-1]
        phi_cur = phases[-1]
    return FrameTrajectory(
        np.array(times), np.array(values, dtype=complex), np.array(phases),
        schedule.omega,
    )


def gtilde_at(schedule: Schedule, t: float, gtilde0: complex | None = None) -> complex:
    traj = gtilde_trajectory(schedule, gtilde0, sample_times=[t])
    i = int(np.argmin(np.abs(traj.times - t)))
    return complex(traj.gtilde[i])


def dynamical_eigenstate(gtilde: complex, n: int, branch: int, dim_osc: int,
                         omega: float = 1.0) -> SystemState:
    """Normalized |+>_x D(-gt/w)|N> + branch |->_x D(+gt/w)|N>, over sqrt(2).

    The two displaced-Fock components sit on orthogonal qubit states, so the
    normalization is exactly 1/sqrt(2) for every gtilde.
    """
    if branch not in (+1, -1):
        raise ValueError(f"branch must be +1 or -1, got {branch}")
    if not 0 <= n < dim_osc:
        raise ValueError(f"Fock index {n} outside truncation {dim_osc}")
    alpha = complex(gtilde) / omega
    d_minus = displacement(-alpha, dim_osc).entries[:, n]
    d_plus = displacement(alpha, dim_osc).entries[:, n]
    vec = np.concatenate([d_minus, branch * d_plus]) / math.sqrt(2.0)
    return SystemState(vec, dim_osc, dim_qubit=2)


def frame_basis(gtilde: complex, t: float, n_max: int, dim_osc: int,
                omega: float = 1.0) -> np.ndarray:
    """Matrix whose columns are |B_{N,b}(t)>, ordered (0+,...,0-,...).

    Includes the e^{-i N omega t} dynamical phase convention.
    """
    if n_max > dim_osc:
        raise ValueError(f"n_max={n_max} exceeds dim_osc={dim_osc}")
    alpha = complex(gtilde) / omega
    d_minus = displacement(-alpha, dim_osc).entries[:, :n_max]
    d_plus = displacement(alpha, dim_osc).entries[:, :n_max]
    phases = np.exp(-1j * omega * t * np.arange(n_max))
    basis = np.zeros((2 * dim_osc, 2 * n_max), dtype=complex)
    basis[:dim_osc, :n_max] = d_minus * phases
    basis[dim_osc:, :n_max] = d_plus * phases
    basis[:dim_osc, n_max:] = d_minus * phases
    basis[dim_osc:, n_max:] = -d_plus * phases
    return basis / math.sqrt(2.0)


def sigma_z_matrix(gtilde: complex, t: float, n_max: int,
                   dim_osc: int | None = None, omega: float = 1.0) -> SigmaZMatrix:
    """sigma_z expanded in the frame basis at time t.

    Element (N'b', Nb) = <E_{N'b'}|sigma_z|E_{Nb}> e^{-i(N-N') omega t} with
    normalized basis states, which reduces to displacement matrix elements:

        [b <N'|D(2 gt/w)|N> + b' <N'|D(-2 gt/w)|N>] / 2 * phase.

    The displacement is evaluated on ``dim_osc`` levels (default 2*n_max) and
    cropped, giving the truncated matrix elements the headroom they need.
    """
    if dim_osc is None:
        dim_osc = 2 * n_max
    if n_max > dim_osc // 2:
        raise ValueError(
            f"n_max={n_max} needs dim_osc >= {2 * n_max} for headroom, "
            f"got {dim_osc}"
        )
    alpha = 2.0 * complex(gtilde) / omega
    d2 = displacement(alpha, dim_osc).entries[:n_max, :n_max]
    d2m = displacement(-alpha, dim_osc).entries[:n_max, :n_max]
    ns = np.arange(n_max)
    phase = np.exp(-1j * omega * t * (ns[None, :] - ns[:, None]))
    blocks = {}
    for rb, rname in ((+1, 0), (-1, 1)):
        for cb, cname in ((+1, 0), (-1, 1)):
            blocks[(rname, cname)] = 0.5 * phase * (cb * d2 + rb * d2m)
    top = np.hstack([blocks[(0, 0)], blocks[(0, 1)]])
    bot = np.hstack([blocks[(1, 0)], blocks[(1, 1)]])
    mat = np.vstack([top, bot])
    return SigmaZMatrix(mat, n_max, t, complex(gtilde))


def first_order_propagator(schedule: Schedule, gtilde0: complex | None, t: float,
                           n_max: int, dim_osc: int | None = None,
                           quadrature_steps: int = 64) -> np.ndarray:
    """First-order coefficient propagator J = exp[(i/2) integral Delta(t) M(t) dt].

    The integral runs over [0, t] with the effective (pulse-flipped) Delta and
    the continuous gtilde trajectory; it is evaluated by composite Simpson
    quadrature with at least ``quadrature_steps`` nodes per oscillator period
    on each pulse-free interval.  Valid to first order in Delta/omega
    (soft bound Delta/omega <= 0.3); time-ordering corrections are O(Delta^2).
    """
    if quadrature_steps < 64:
        raise ValueError("quadrature needs >= 64 steps per period")
    if gtilde0 is None:
        gtilde0 = schedule.g_at(0.0)
    omega = schedule.omega
    period = 2.0 * math.pi / omega
    accum = np.zeros((2 * n_max, 2 * n_max), dtype=complex)
    g_cur = complex(gtilde0)
    disp_cache: dict = {}

    def m_at(gt: complex, tt: float) -> np.ndarray:
        key = (round(gt.real, 13), round(gt.imag, 13))
        base = disp_cache.get(key)
        if base is None:
            alpha = 2.0 * gt / omega
            d = 2 * n_max if dim_osc is None else dim_osc
            d2 = displacement(alpha, d).entries[:n_max, :n_max]
            d2m = displacement(-alpha, d).entries[:n_max, :n_max]
            top = np.hstack([0.5 * (d2 + d2m), 0.5 * (-d2 + d2m)])
            bot = np.hstack([0.5 * (d2 - d2m), 0.5 * (-d2 - d2m)])
            base = np.vstack([top, bot])
            disp_cache[key] = base
        ns = np.arange(n_max)
        phase = np.exp(-1j * omega * tt * (ns[None, :] - ns[:, None]))
        return base * np.tile(phase, (2, 2))

    for iv in effective_intervals(schedule, t_end=t):
        span = iv.t1 - iv.t0
        if span <= 0:
            continue
        g_form = iv.effective_g_form()
        d_form = iv.effective_delta_form()
        n_panels = max(1, math.ceil(span / period * quadrature_steps / 2))
        nodes = np.linspace(iv.t0, iv.t1, 2 * n_panels + 1)
        weights = np.ones(len(nodes))
        weights[1:-1:2] = 4.0
        weights[2:-1:2] = 2.0
        weights *= (span / n_panels) / 6.0
        for tt, wq in zip(nodes, weights):
            gt = gtilde_step(g_form, iv.t0, float(tt), g_cur, omega,
                             iv.seg_t0, iv.seg_t1)
            dval = iv.sign_delta * d_form.value_at(float(tt), iv.seg_t0, iv.seg_t1)
            if dval != 0.0:
                accum += (wq * dval) * m_at(gt, float(tt))
        g_cur = gtilde_step(g_form, iv.t0, iv.t1, g_cur, omega,
                            iv.seg_t0, iv.seg_t1)

    herm = 0.5 * (accum + accum.conj().T)
    evals, evecs = np.linalg.eigh(herm)
    j = (evecs * np.exp(0.5j * evals)) @ evecs.conj().T
    defect = np.abs(j @ j.conj().T - np.eye(2 * n_max)).max()
    if defect > _UNITARITY_TOL:
        raise NonUnitaryError(
            f"first-order propagator non-unitary by {defect:.3e}"
        )
    return j


def expand_in_frame(state: SystemState, gtilde: complex, t: float, n_max: int,
                    omega: float = 1.0,
                    residual_tol: float = COEFF_RESIDUAL_TOL) -> CoefficientVector:
    """Coefficients of a full state against the frame basis at time t."""
    if state.dim_qubit != 2:
        raise ValueError("frame expansion needs a full qubit-oscillator state")
    basis = frame_basis(gtilde, t, n_max, state.dim_osc, omega)
    coeffs = basis.conj().T @ state.amplitudes
    residual = float(np.linalg.norm(state.amplitudes - basis @ coeffs))
    if residual > residual_tol:
        raise IncompleteBasisError(residual, n_max)
    return CoefficientVector(coeffs, n_max, residual)


def assemble_from_frame(coeffs: CoefficientVector, gtilde: complex, t: float,
                        dim_osc: int, omega: float = 1.0) -> SystemState:
    """Rebuild the physical state sum_{N,b} C_{N,b} |B_{N,b}(t)>."""
    basis = frame_basis(gtilde, t, coeffs.n_max, dim_osc, omega)
    vec = basis @ coeffs.entries
    n = float(np.linalg.norm(vec))
    return SystemState(vec, dim_osc, dim_qubit=2,
                       normalized=abs(n - 1.0) <= 1e-6)


def predict_state(schedule: Schedule, t: float, dim_osc: int,
                  n_max: int | None = None,
                  initial_state: SystemState | None = None,
                  coeffs: CoefficientVector | None = None,
                  first_order: bool = False,
                  quadrature_steps: int = 64,
                  include_global_phase: bool = True) -> SystemState:
    """Frame prediction of the evolved state at time t.

    With ``first_order=False`` the coefficients are constant (exact in the
    Delta -> 0 limit); with ``first_order=True`` they are propagated by the
    first-order propagator using the schedule's Delta(t).  The pulse operators
    crossed before t are reapplied so the result is directly comparable to the
    full numerical evolution.
    """
    if n_max is None:
        n_max = dim_osc // 2
    gtilde0 = schedule.g_at(0.0)
    if coeffs is None:
        if initial_state is None:
            raise ValueError("need either initial_state or coeffs")
        coeffs = expand_in_frame(initial_state, gtilde0, 0.0, n_max,
                                 schedule.omega)
    if first_order:
        j = first_order_propagator(schedule, gtilde0, t, n_max, dim_osc,
                                   quadrature_steps)
        coeffs = CoefficientVector(j @ coeffs.entries, n_max, coeffs.residual)
    traj = gtilde_trajectory(schedule, gtilde0, sample_times=[t],
                             with_phase=include_global_phase)
    i = int(np.argmin(np.abs(traj.times - t)))
    gt = complex(traj.gtilde[i])
    phi = float(traj.phi_global[i]) if include_global_phase else 0.0
    state = assemble_from_frame(coeffs, gt, t, dim_osc, schedule.omega)
    prefix = pulse_product(schedule, t_end=t)
    blocks = prefix @ state.qubit_blocks()
    vec = cmath.exp(1j * phi) * blocks.reshape(-1)
    n = float(np.linalg.norm(vec))
    return SystemState(vec, dim_osc, dim_qubit=2,
                       normalized=abs(n - 1.0) <= 1e-6)
