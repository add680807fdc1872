"""Exact numerical time evolution of the full Hamiltonian under a Schedule.

The state is propagated by piecewise-constant-Hamiltonian stepping: each step
applies exp(-i H(t_mid) dt), with g and Delta sampled at the step midpoint
(second-order accurate).  Pi-pulses are applied exactly at their times between
steps.  Two evaluation paths compute the same step exponential:

- windows with constant parameters use one cached Hermitian eigendecomposition
  and a single exact exponential for the whole window (the product of the
  individual step exponentials collapses because they commute);
- time-dependent windows evaluate exp(-i H(t_mid) dt) |psi> by a Chebyshev
  expansion driven by O(dim) structured matrix-vector products, converged to
  machine precision, so each step is unitary to ~1e-15.

This module is the independent oracle for the analytic frame; it never uses
the frame machinery.
"""

from __future__ import annotations

import math
from collections import OrderedDict

import numpy as np
from scipy.special import jv

from .fock import SystemState
from .model import PAULI, Constant, HamiltonianParams, Schedule, hamiltonian_at

NORM_DRIFT_LIMIT = 1e-6
_BOUNDARY_LEVELS = 2


class DegeneracyError(ValueError):
    """Raised when the Delta=0 ground doublet makes eigh ill-defined."""


class IntegrationFailureError(RuntimeError):
    """Raised when the propagated norm drifts beyond tolerance."""


class _EighCache:
    """Small LRU of Hermitian eigendecompositions keyed on (g, delta, omega, dim)."""

    def __init__(self, maxsize: int = 8):
        self.maxsize = maxsize
        self._store: OrderedDict = OrderedDict()

    def get(self, g: float, delta: float, omega: float, dim_osc: int):
        key = (round(g, 14), round(delta, 14), round(omega, 14), dim_osc)
        hit = self._store.get(key)
        if hit is None:
            h = hamiltonian_at(HamiltonianParams(g, delta, omega, dim_osc)).entries
            evals, evecs = np.linalg.eigh(h)
            hit = (evals, evecs)
            self._store[key] = hit
            if len(self._store) > self.maxsize:
                self._store.popitem(last=False)
        else:
            self._store.move_to_end(key)
        return hit


_eigh_cache = _EighCache()


def _apply_h(psi2: np.ndarray, g: float, delta: float, omega: float,
             diag: np.ndarray, sq: np.ndarray) -> np.ndarray:
    """H psi for psi2 of shape (2, dim_osc), using the tridiagonal structure."""
    out = diag * psi2
    # g sigma_x (a + a^dag): sigma_x is diag(+1, -1) in the x eigenbasis
    x0 = np.zeros_like(psi2[0])
    x0[1:] = sq * psi2[0, :-1]
    x0[:-1] += sq * psi2[0, 1:]
    x1 = np.zeros_like(psi2[1])
    x1[1:] = sq * psi2[1, :-1]
    x1[:-1] += sq * psi2[1, 1:]
    out[0] += g * x0
    out[1] -= g * x1
    # -(Delta/2) sigma_z swaps the qubit halves in this basis
    out[0] += (-0.5 * delta) * psi2[1]
    out[1] += (-0.5 * delta) * psi2[0]
    return out


def _chebyshev_coeffs(rho_dt: float) -> np.ndarray:
    """(-i)^k Bessel coefficients of exp(-i x dt), truncated at 1e-16."""
    k_max = int(rho_dt + 40 + 4.0 * math.sqrt(rho_dt + 1.0))
    ks = np.arange(k_max + 1)
    bess = jv(ks, rho_dt)
    coeffs = np.where(ks == 0, 1.0, 2.0) * (-1j) ** ks * bess
    keep = np.nonzero(np.abs(bess) > 1e-16)[0]
    last = int(keep[-1]) if keep.size else 0
    return coeffs[: last + 1]


def _cheb_step(psi2, g, delta, omega, dim_osc, dt, diag, sq, coeffs, center, rho):
    """exp(-i H dt) psi via Chebyshev recurrence on (H - center)/rho."""
    t_prev = psi2
    t_cur = (_apply_h(psi2, g, delta, omega, diag, sq) - center * psi2) / rho
    acc = coeffs[0] * t_prev + coeffs[1] * t_cur
    for ck in coeffs[2:]:
        t_next = 2.0 * (
            (_apply_h(t_cur, g, delta, omega, diag, sq) - center * t_cur) / rho
        ) - t_prev
        acc += ck * t_next
        t_prev, t_cur = t_cur, t_next
    return np.exp(-1j * center * dt) * acc


def evolve(state: SystemState, schedule: Schedule, t0: float = 0.0,
           t1: float | None = None, steps_per_period: int = 512) -> SystemState:
    """Propagate a full qubit-oscillator state from t0 to t1.

    Pulses with t0 <= t_pulse < t1 are applied when crossed (a pulse exactly
    at t0 fires at the start; one exactly at t1 belongs to the next stretch).
    Raises IntegrationFailureError when the norm drifts by more than 1e-6.
    """
    if state.dim_qubit != 2:
        raise ValueError("evolve needs a full qubit-oscillator state")
    if steps_per_period < 32:
        raise ValueError("steps_per_period must be >= 32")
    if t1 is None:
        t1 = schedule.t_final
    if t1 < t0 - 1e-12:
        raise ValueError(f"evolution window [{t0}, {t1}] runs backward")
    if t0 < -1e-12 or t1 > schedule.t_final + 1e-12:
        raise ValueError("evolution window outside schedule span")

    dim = state.dim_osc
    omega = schedule.omega
    period = schedule.period
    dt_nominal = period / steps_per_period
    diag = (omega * (np.arange(dim) + 0.5))[None, :]
    sq = np.sqrt(np.arange(1, dim, dtype=float))

    cuts = {t0, t1}
    for seg in schedule.segments:
        for edge in (seg.t_start, seg.t_end):
            if t0 < edge < t1:
                cuts.add(edge)
    pulses = [p for p in schedule.sorted_pulses() if t0 <= p.time < t1]
    for p in pulses:
        if t0 < p.time:
            cuts.add(p.time)
    edges = sorted(cuts)

    psi = state.qubit_blocks().copy()
    norm0 = float(np.linalg.norm(psi))
    leakage = state.leakage
    steps_done = 0
    pulse_idx = 0

    def track(psi2):
        nonlocal leakage
        tail = float(np.sum(np.abs(psi2[:, -_BOUNDARY_LEVELS:]) ** 2))
        leakage = max(leakage, tail)

    def check_norm(psi2):
        drift = abs(float(np.linalg.norm(psi2)) - norm0)
        if drift > NORM_DRIFT_LIMIT:
            raise IntegrationFailureError(
                f"norm drifted by {drift:.3e} after {steps_done} steps; "
                "increase steps_per_period or dim_osc"
            )

    for left, right in zip(edges[:-1], edges[1:]):
        while pulse_idx < len(pulses) and pulses[pulse_idx].time <= left + 1e-12:
            psi = PAULI[pulses[pulse_idx].axis] @ psi
            pulse_idx += 1
        span = right - left
        if span <= 1e-15:
            continue
        seg = schedule.segment_at((left + right) / 2.0)
        constant = isinstance(seg.g_form, Constant) and isinstance(
            seg.delta_form, Constant
        )
        if constant:
            evals, evecs = _eigh_cache.get(
                seg.g_form.value, seg.delta_form.value, omega, dim
            )
            flat = psi.reshape(-1)
            flat = evecs @ (np.exp(-1j * evals * span) * (evecs.conj().T @ flat))
            psi = flat.reshape(2, dim)
            steps_done += max(1, round(span / dt_nominal))
        else:
            n_steps = max(1, math.ceil(span / dt_nominal - 1e-9))
            dt = span / n_steps
            g_max = max(abs(seg.g_at(left)), abs(seg.g_at(right)),
                        abs(getattr(seg.g_form, "amplitude", 0.0)),
                        abs(getattr(seg.g_form, "value", 0.0)),
                        abs(getattr(seg.g_form, "v0", 0.0)),
                        abs(getattr(seg.g_form, "v1", 0.0)))
            d_max = max(abs(seg.delta_at(left)), abs(seg.delta_at(right)))
            lam_hi = omega * (dim - 0.5) + 2.0 * g_max * math.sqrt(dim) + d_max / 2
            lam_lo = 0.5 * omega - 2.0 * g_max * math.sqrt(dim) - d_max / 2
            center = 0.5 * (lam_hi + lam_lo)
            rho = 0.5 * (lam_hi - lam_lo)
            coeffs = _chebyshev_coeffs(rho * dt)
            for k in range(n_steps):
                t_mid = left + (k + 0.5) * dt
                psi = _cheb_step(psi, seg.g_at(t_mid), seg.delta_at(t_mid),
                                 omega, dim, dt, diag, sq, coeffs, center, rho)
                steps_done += 1
                if steps_done % 100 == 0:
                    check_norm(psi)
        track(psi)
        check_norm(psi)

    while pulse_idx < len(pulses):
        psi = PAULI[pulses[pulse_idx].axis] @ psi
        pulse_idx += 1

    vec = psi.reshape(-1)
    n = float(np.linalg.norm(vec))
    return SystemState(vec, dim, dim_qubit=2, leakage=leakage,
                       normalized=abs(n - 1.0) <= 1e-6)


def ground_state(params: HamiltonianParams) -> SystemState:
    """Lowest eigenvector of H, with the dominant amplitude made real positive.

    Delta = 0 leaves the ground doublet degenerate; use the dynamical
    eigenstates from the frame module instead in that limit.
    """
    if params.delta <= 0.0:
        raise DegeneracyError(
            "ground state is degenerate at Delta <= 0; use "
            "frame.dynamical_eigenstate for the Delta -> 0 limit"
        )
    h = hamiltonian_at(params).entries
    evals, evecs = np.linalg.eigh(h)
    vec = evecs[:, 0]
    idx = int(np.argmax(np.abs(vec)))
    vec = vec * np.exp(-1j * np.angle(vec[idx]))
    return SystemState(vec, params.dim_osc, dim_qubit=2)
