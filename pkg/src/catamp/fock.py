"""Truncated-Fock-space primitives: ladder operators, displacements, coherent
and cat states, and qubit (x) oscillator tensor assembly.

Conventions
-----------
- The oscillator is represented on its lowest ``dim_osc`` number states.
- The qubit basis is the sigma_x eigenbasis, ordered (|+>_x, |->_x).  Composite
  vectors are stored qubit-major: index q*dim_osc + n holds |q>|n>.
- hbar = 1 throughout; displacement amplitudes are dimensionless.

All returned states are normalized on the truncated space unless explicitly
flagged otherwise.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import expm
from scipy.special import gammaln

HERMITICITY_TOL = 1e-12
NORM_TOL = 1e-6
TAIL_TOL = 1e-8


class DimensionError(ValueError):
    """Raised for invalid or inconsistent Hilbert-space dimensions."""


class NullStateError(ValueError):
    """Raised when a requested superposition interferes to the null vector."""


class TruncationWarning(UserWarning):
    """Emitted when a requested amplitude strains the Fock truncation."""


@dataclass(frozen=True)
class TruncatedOperator:
    """Dense operator on the (qubit (x)) truncated-oscillator space.

    Parameters
    ----------
    entries : ndarray
        Square complex matrix of size (dim_qubit * dim_osc)^2.
    dim_osc : int
        Fock truncation dimension.
    dim_qubit : int
        1 for oscillator-only operators, 2 for composite ones.
    hermitian : bool
        Declares the operator Hermitian; checked at construction.
    """

    entries: np.ndarray
    dim_osc: int
    dim_qubit: int = 1
    hermitian: bool = False

    def __post_init__(self):
        mat = np.asarray(self.entries, dtype=complex)
        object.__setattr__(self, "entries", mat)
        if self.dim_qubit not in (1, 2):
            raise DimensionError(f"dim_qubit must be 1 or 2, got {self.dim_qubit}")
        if self.dim_osc < 2:
            raise DimensionError(f"dim_osc must be >= 2, got {self.dim_osc}")
        n = self.dim_qubit * self.dim_osc
        if mat.shape != (n, n):
            raise DimensionError(
                f"matrix shape {mat.shape} inconsistent with "
                f"dim_qubit*dim_osc = {n}"
            )
        if self.hermitian:
            scale = max(np.abs(mat).max(), 1.0)
            defect = np.abs(mat - mat.conj().T).max() / scale
            if defect > HERMITICITY_TOL:
                raise ValueError(
                    f"operator flagged Hermitian but |A - A^dag| = {defect:.3e}"
                )

    @property
    def dim(self) -> int:
        return self.dim_qubit * self.dim_osc

    def dagger(self) -> "TruncatedOperator":
        return TruncatedOperator(
            self.entries.conj().T, self.dim_osc, self.dim_qubit, self.hermitian
        )

    def __matmul__(self, other: "TruncatedOperator") -> "TruncatedOperator":
        if (self.dim_osc, self.dim_qubit) != (other.dim_osc, other.dim_qubit):
            raise DimensionError("operator dimensions do not match")
        return TruncatedOperator(
            self.entries @ other.entries, self.dim_osc, self.dim_qubit
        )


@dataclass(frozen=True)
class SystemState:
    """Complex amplitude vector over the (qubit (x)) Fock basis.

    ``leakage`` accumulates probability lost to the truncation boundary during
    time evolution; it is diagnostic only and not subtracted from the norm.
    States flagged ``normalized`` must have unit norm within 1e-6; projection
    results carry ``normalized=False``.
    """

    amplitudes: np.ndarray
    dim_osc: int
    dim_qubit: int = 1
    leakage: float = 0.0
    normalized: bool = True

    def __post_init__(self):
        vec = np.asarray(self.amplitudes, dtype=complex)
        object.__setattr__(self, "amplitudes", vec)
        if vec.shape != (self.dim_qubit * self.dim_osc,):
            raise DimensionError(
                f"amplitude vector of length {vec.shape} inconsistent with "
                f"dims ({self.dim_qubit}, {self.dim_osc})"
            )
        if self.normalized:
            n = float(np.linalg.norm(vec))
            if abs(n - 1.0) > NORM_TOL:
                raise ValueError(f"state flagged normalized has norm {n!r}")

    @property
    def dim(self) -> int:
        return self.dim_qubit * self.dim_osc

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalize(self) -> "SystemState":
        n = self.norm()
        if n < 1e-15:
            raise NullStateError("cannot normalize a null state")
        return replace(self, amplitudes=self.amplitudes / n, normalized=True)

    def qubit_blocks(self) -> np.ndarray:
        """View of the amplitudes as a (dim_qubit, dim_osc) array."""
        return self.amplitudes.reshape(self.dim_qubit, self.dim_osc)


def ladder(dim_osc: int):
    """Annihilation and creation operators on the truncated space.

    <n-1|a|n> = sqrt(n); the creation operator is the conjugate transpose.
    """
    if dim_osc < 2:
        raise DimensionError(f"dim_osc must be >= 2, got {dim_osc}")
    offdiag = np.sqrt(np.arange(1, dim_osc, dtype=float))
    a = np.diag(offdiag, k=1).astype(complex)
    return (
        TruncatedOperator(a, dim_osc),
        TruncatedOperator(a.conj().T, dim_osc),
    )


def number_operator(dim_osc: int) -> TruncatedOperator:
    return TruncatedOperator(
        np.diag(np.arange(dim_osc, dtype=float)).astype(complex),
        dim_osc,
        hermitian=True,
    )


def fock_state(n: int, dim_osc: int) -> SystemState:
    if not 0 <= n < dim_osc:
        raise DimensionError(f"Fock index {n} outside truncation {dim_osc}")
    vec = np.zeros(dim_osc, dtype=complex)
    vec[n] = 1.0
    return SystemState(vec, dim_osc)


def displacement(alpha: complex, dim_osc: int) -> TruncatedOperator:
    """Displacement operator D(alpha) = exp(alpha a^dag - alpha* a).

    Computed as a dense matrix exponential of the anti-Hermitian generator.
    Unitary to ~1e-10 as long as the displaced support fits the truncation;
    a TruncationWarning is emitted when |alpha|^2 exceeds dim_osc/4.
    """
    alpha = complex(alpha)
    if abs(alpha) ** 2 > dim_osc / 4:
        warnings.warn(
            f"displacement amplitude |alpha|={abs(alpha):.3g} is large for "
            f"dim_osc={dim_osc}; expect truncation error",
            TruncationWarning,
            stacklevel=2,
        )
    a_op, adag_op = ladder(dim_osc)
    gen = alpha * adag_op.entries - np.conj(alpha) * a_op.entries
    return TruncatedOperator(expm(gen), dim_osc)


def coherent_state(alpha: complex, dim_osc: int) -> SystemState:
    """Coherent state |alpha> with amplitudes e^{-|a|^2/2} a^n / sqrt(n!).

    Amplitudes are evaluated in log space (safe for large photon numbers) and
    renormalized on the truncated space; a TruncationWarning is emitted if the
    discarded tail probability exceeds 1e-8.
    """
    alpha = complex(alpha)
    if dim_osc < 2:
        raise DimensionError(f"dim_osc must be >= 2, got {dim_osc}")
    n = np.arange(dim_osc)
    if alpha == 0:
        return fock_state(0, dim_osc)
    log_mag = -abs(alpha) ** 2 / 2 + n * math.log(abs(alpha)) - 0.5 * gammaln(n + 1)
    phase = np.exp(1j * n * np.angle(alpha))
    vec = np.exp(log_mag) * phase
    captured = float(np.sum(np.abs(vec) ** 2))
    if 1.0 - captured > TAIL_TOL:
        warnings.warn(
            f"coherent state |alpha|={abs(alpha):.3g} loses tail probability "
            f"{1.0 - captured:.2e} at dim_osc={dim_osc}",
            TruncationWarning,
            stacklevel=2,
        )
    return SystemState(vec / math.sqrt(captured), dim_osc)


def cat_state(alpha: complex, relative_sign: int, dim_osc: int) -> SystemState:
    """Normalized superposition (|-alpha> + sign |+alpha>) / sqrt(2(1 + s e^{-2|a|^2})).

    The odd cat (sign=-1) interferes destructively to the null vector at
    alpha=0 and raises NullStateError there.
    """
    if relative_sign not in (+1, -1):
        raise ValueError(f"relative_sign must be +1 or -1, got {relative_sign}")
    alpha = complex(alpha)
    norm_sq = 2.0 * (1.0 + relative_sign * math.exp(-2.0 * abs(alpha) ** 2))
    if norm_sq < 1e-12:
        raise NullStateError(
            "odd cat state at alpha ~ 0 has vanishing norm"
        )
    minus = coherent_state(-alpha, dim_osc).amplitudes
    plus = coherent_state(alpha, dim_osc).amplitudes
    vec = (minus + relative_sign * plus) / math.sqrt(norm_sq)
    n = float(np.linalg.norm(vec))
    # residual renormalization absorbs truncation of the two components
    return SystemState(vec / n, dim_osc)


def tensor_qubit(osc_state: SystemState, qubit_coeffs) -> SystemState:
    """Attach a qubit factor c_+|+>_x + c_-|->_x to an oscillator state.

    The result is qubit-major: amplitudes = (c_+ * osc, c_- * osc).  No
    renormalization is applied; the result is flagged normalized only when it
    actually has unit norm.
    """
    if osc_state.dim_qubit != 1:
        raise DimensionError("osc_state already carries a qubit factor")
    c_plus, c_minus = (complex(c) for c in qubit_coeffs)
    vec = np.concatenate(
        [c_plus * osc_state.amplitudes, c_minus * osc_state.amplitudes]
    )
    n = float(np.linalg.norm(vec))
    return SystemState(
        vec,
        osc_state.dim_osc,
        dim_qubit=2,
        leakage=osc_state.leakage,
        normalized=abs(n - 1.0) <= NORM_TOL,
    )


def default_dim_osc(alpha_max: float, headroom: float = 2.0) -> int:
    """Fock truncation for scenarios reaching coherent amplitude alpha_max.

    ceil(|a|^2 + 6|a| + 20) keeps the coherent tail below ~1e-8; the headroom
    factor leaves room for displacement spillover in frame expansions (which
    use n_max = dim_osc/2).  The result is rounded up to a power of two.
    """
    a = abs(alpha_max)
    base = math.ceil(a * a + 6.0 * a + 20.0)
    need = max(4, math.ceil(headroom * base))
    return 1 << (need - 1).bit_length()
