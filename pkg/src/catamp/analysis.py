"""State analysis: qubit projection, Wigner function, fidelity, cat-size
metric, and coherent-amplitude extraction.

Wigner convention
-----------------
W(q, p) = (1/pi) <D(alpha) P D(alpha)^dag> with alpha = (q + i p)/sqrt(2) and
P the photon-number parity operator.  This gives integral W dq dp = 1 and a
vacuum peak of 1/pi.  Pointwise |W| <= 1/pi; pure states satisfy
2 pi integral W^2 dq dp = 1.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .fock import NORM_TOL, SystemState, TruncationWarning, cat_state

_GRID_SPACING_LIMIT = 0.25
_BATCH = 4096


class ProjectionError(ValueError):
    """Raised when a qubit projection leaves (numerically) nothing behind."""


class OptimizerError(RuntimeError):
    """Raised when amplitude extraction fails to converge."""


@dataclass(frozen=True)
class WignerGrid:
    """Real W(q, p) samples over a rectangular phase-space grid.

    ``values[i, j]`` is W at (q_axis[j], p_axis[i]); ``normalization`` holds
    the trapezoid estimate of the full integral (1 for well-covered states).
    """

    q_axis: np.ndarray
    p_axis: np.ndarray
    values: np.ndarray
    normalization: float

    def to_csv_text(self) -> str:
        """Header row carries the q axis, first column the p axis."""
        lines = ["p\\q," + ",".join(_fmt(q) for q in self.q_axis)]
        for i, p in enumerate(self.p_axis):
            lines.append(
                _fmt(p) + "," + ",".join(_fmt(v) for v in self.values[i])
            )
        return "\n".join(lines) + "\n"


def _fmt(x: float) -> str:
    return f"{x:.10g}"


def project_qubit(state: SystemState, qubit_coeffs):
    """Project a full state onto a qubit direction.

    Returns the unnormalized oscillator vector <qubit|state> and its squared
    norm (the projection weight); callers normalize when needed.
    """
    if state.dim_qubit != 2:
        raise ProjectionError("projection needs a full qubit-oscillator state")
    c_plus, c_minus = (complex(c) for c in qubit_coeffs)
    blocks = state.qubit_blocks()
    vec = np.conj(c_plus) * blocks[0] + np.conj(c_minus) * blocks[1]
    weight = float(np.vdot(vec, vec).real)
    if weight < 1e-12:
        raise ProjectionError(
            f"projection weight {weight:.3e} below 1e-12; state is "
            "(numerically) orthogonal to the requested qubit direction"
        )
    return (
        SystemState(vec, state.dim_osc, leakage=state.leakage, normalized=False),
        weight,
    )


@lru_cache(maxsize=8)
def _quadrature_eig(dim_osc: int):
    """Eigendecomposition of K = i(a^dag - a), shared by all displacements."""
    sq = np.sqrt(np.arange(1, dim_osc))
    k = np.zeros((dim_osc, dim_osc), dtype=complex)
    k[np.arange(1, dim_osc), np.arange(dim_osc - 1)] = 1j * sq
    k[np.arange(dim_osc - 1), np.arange(1, dim_osc)] = -1j * sq
    evals, evecs = np.linalg.eigh(k)
    return evals, evecs


def wigner(osc_state: SystemState, q_axis, p_axis) -> WignerGrid:
    """Displaced-parity Wigner function of an oscillator state.

    One exact displacement per grid point: D(alpha) factors through the fixed
    eigenbasis of i(a^dag - a), so each point costs two dense matrix-vector
    products.  Grid spacing above 0.25 blurs cat interference fringes and a
    grid reaching beyond sqrt(2 dim_osc) leaves the trustworthy region; both
    draw warnings.
    """
    if osc_state.dim_qubit != 1:
        raise ValueError("wigner expects an oscillator-only state; project first")
    q_axis = np.asarray(q_axis, dtype=float)
    p_axis = np.asarray(p_axis, dtype=float)
    for name, ax in (("q", q_axis), ("p", p_axis)):
        if ax.size > 1 and np.max(np.diff(ax)) > _GRID_SPACING_LIMIT + 1e-12:
            warnings.warn(
                f"{name}-axis spacing exceeds {_GRID_SPACING_LIMIT}; "
                "interference fringes may alias",
                UserWarning,
                stacklevel=2,
            )
    dim = osc_state.dim_osc
    r_max = math.hypot(max(abs(q_axis[0]), abs(q_axis[-1])),
                       max(abs(p_axis[0]), abs(p_axis[-1])))
    if r_max > math.sqrt(2.0 * dim):
        warnings.warn(
            f"grid radius {r_max:.1f} beyond reliable region "
            f"sqrt(2 dim_osc) = {math.sqrt(2.0 * dim):.1f}",
            TruncationWarning,
            stacklevel=2,
        )
    psi = osc_state.amplitudes
    evals, evecs = _quadrature_eig(dim)
    ns = np.arange(dim)
    parity = np.where(ns % 2 == 0, 1.0, -1.0)

    qq, pp = np.meshgrid(q_axis, p_axis)
    alpha = (qq + 1j * pp).reshape(-1) / math.sqrt(2.0)
    out = np.empty(alpha.size, dtype=float)
    for lo in range(0, alpha.size, _BATCH):
        chunk = alpha[lo : lo + _BATCH]
        theta = np.angle(chunk)
        mag = np.abs(chunk)
        u = psi[:, None] * np.exp(-1j * np.outer(ns, theta))
        y = evecs.conj().T @ u
        y *= np.exp(1j * np.outer(evals.real, mag))
        x = evecs @ y
        out[lo : lo + chunk.size] = parity @ (np.abs(x) ** 2)
    values = out.reshape(len(p_axis), len(q_axis)) / math.pi
    if len(q_axis) > 1 and len(p_axis) > 1:
        norm = float(np.trapezoid(np.trapezoid(values, q_axis, axis=1), p_axis))
    else:
        norm = float("nan")
    return WignerGrid(q_axis, p_axis, values, norm)


def fidelity(a: SystemState, b: SystemState) -> float:
    """|<a|b>|^2 for pure states; auto-normalizes with a warning if needed."""
    if a.dim != b.dim or a.dim_qubit != b.dim_qubit:
        raise ValueError(
            f"state dimensions differ: {(a.dim_qubit, a.dim_osc)} vs "
            f"{(b.dim_qubit, b.dim_osc)}"
        )
    va, vb = a.amplitudes, b.amplitudes
    na, nb = np.linalg.norm(va), np.linalg.norm(vb)
    if abs(na - 1.0) > NORM_TOL or abs(nb - 1.0) > NORM_TOL:
        warnings.warn("fidelity inputs not normalized; normalizing",
                      UserWarning, stacklevel=2)
    overlap = np.vdot(va, vb) / (na * nb)
    return float(min(1.0, abs(overlap) ** 2))


def cat_size(beta1: complex, beta2: complex) -> float:
    """Squared phase-space distance |beta1 - beta2|^2 between cat components."""
    return abs(complex(beta1) - complex(beta2)) ** 2


def _golden_min(f, lo: float, hi: float, tol: float) -> float:
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return (a + b) / 2.0


@dataclass(frozen=True)
class AmplitudeFit:
    alpha: complex
    fidelity: float
    sweeps: int


def extract_amplitude(osc_state: SystemState, initial_guess: complex,
                      tol: float = 1e-8, max_sweeps: int = 80) -> AmplitudeFit:
    """Coherent amplitude of the even cat closest to the given state.

    Maximizes fidelity to cat_state(alpha, +1) by coordinate descent on
    (Re alpha, Im alpha) with golden-section line searches, starting from the
    guess (typically the frame prediction gtilde/omega).
    """
    state = osc_state if abs(osc_state.norm() - 1.0) <= NORM_TOL \
        else osc_state.normalize()
    dim = state.dim_osc
    psi = state.amplitudes

    def neg_fid(re: float, im: float) -> float:
        target = cat_state(complex(re, im), +1, dim)
        return -abs(np.vdot(target.amplitudes, psi)) ** 2

    re, im = float(np.real(initial_guess)), float(np.imag(initial_guess))
    span = max(0.5, 0.05 * abs(initial_guess))
    for sweep in range(1, max_sweeps + 1):
        re_new = _golden_min(lambda x: neg_fid(x, im), re - span, re + span,
                             tol / 4.0)
        im_new = _golden_min(lambda y: neg_fid(re_new, y), im - span, im + span,
                             tol / 4.0)
        move = math.hypot(re_new - re, im_new - im)
        re, im = re_new, im_new
        if move < tol and span <= 4.0 * tol:
            achieved = -neg_fid(re, im)
            if achieved <= 0.5:
                raise OptimizerError(
                    f"amplitude fit converged to fidelity {achieved:.3f} <= 0.5; "
                    "state is not close to an even cat"
                )
            return AmplitudeFit(complex(re, im), achieved, sweep)
        span = max(4.0 * tol, min(span / 2.0, 4.0 * move + tol))
    raise OptimizerError(
        f"amplitude extraction did not converge in {max_sweeps} sweeps"
    )
