"""Half-line CMV operators in factored form.

A CMV operator is the pentadiagonal unitary built from a sequence of
Verblunsky coefficients ``alpha_n`` in the unit disk.  It factors as
``C = L M`` where ``L`` and ``M`` are direct sums of 2x2 blocks

    Theta(alpha) = [[conj(alpha), rho], [rho, -alpha]],   rho = sqrt(1 - |alpha|^2),

with ``L`` pairing sites (0,1), (2,3), ... and ``M`` pairing (1,2), (3,4), ...
The operator is stored factored and applied as two block-diagonal sweeps;
dense entries are materialized only for tests and small solves.

Coefficients are kept as (alpha, rho) pairs.  For high barriers rho is the
primary datum (alpha = sqrt(1 - rho^2) may round to 1.0 while rho stays
positive), which avoids the catastrophic cancellation of rho = sqrt(1-|alpha|^2).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from ._accel import lm_apply, lm_apply_adjoint
from .errors import PreconditionError, TruncationOverflowError

__all__ = [
    "DiskCoefficient",
    "ZERO_COEFFICIENT",
    "VerblunskySequence",
    "StateVector",
    "CmvOperator",
    "theta_block",
    "build_cmv",
    "ensure_window",
    "apply",
    "apply_adjoint",
    "truncate",
    "operator_difference_apply",
]

_PAIR_TOL = 1e-14


@dataclass(frozen=True)
class DiskCoefficient:
    """A Verblunsky coefficient stored as the validated pair (alpha, rho)."""

    alpha: complex
    rho: float

    def __post_init__(self):
        if not (0.0 < self.rho <= 1.0):
            raise ValueError(f"rho must lie in (0, 1], got {self.rho}")
        if abs(self.alpha) > 1.0:
            raise ValueError(f"|alpha| must not exceed 1, got {abs(self.alpha)}")
        residual = abs(self.alpha) ** 2 + self.rho**2 - 1.0
        if abs(residual) > _PAIR_TOL:
            raise ValueError(
                f"|alpha|^2 + rho^2 = 1 violated by {residual:.3e} for "
                f"alpha={self.alpha}, rho={self.rho}"
            )

    @classmethod
    def from_alpha(cls, alpha: complex) -> "DiskCoefficient":
        """Pair with rho derived from alpha; requires |alpha| < 1 strictly."""
        alpha = complex(alpha)
        if abs(alpha) >= 1.0:
            raise ValueError(f"alpha must lie in the open unit disk, got |alpha|={abs(alpha)}")
        return cls(alpha, math.sqrt(1.0 - abs(alpha) ** 2))

    @classmethod
    def from_rho(cls, rho: float, phase: complex = 1.0) -> "DiskCoefficient":
        """Pair with rho exact (the barrier path) and alpha = phase*sqrt(1-rho^2)."""
        rho = float(rho)
        if not (0.0 < rho <= 1.0):
            raise ValueError(f"rho must lie in (0, 1], got {rho}")
        return cls(phase * math.sqrt(1.0 - rho * rho), rho)

    def rotated(self, lam: complex) -> "DiskCoefficient":
        """Multiply alpha by a unimodular lambda; rho is untouched."""
        if abs(abs(lam) - 1.0) > 1e-12:
            raise ValueError(f"boundary phase must be unimodular, got |lambda|={abs(lam)}")
        if self.alpha == 0:
            return self
        return DiskCoefficient(lam * self.alpha, self.rho)


ZERO_COEFFICIENT = DiskCoefficient(0j, 1.0)


def theta_block(c: DiskCoefficient) -> np.ndarray:
    """The 2x2 unitary [[conj(alpha), rho], [rho, -alpha]]."""
    return np.array(
        [[np.conj(c.alpha), c.rho], [c.rho, -c.alpha]], dtype=np.complex128
    )


class VerblunskySequence:
    """A map n -> coefficient with an implicit zero tail.

    ``entries`` lists the stored coefficients; every other index is the zero
    coefficient (alpha=0, rho=1).  Sequences produced by the sparse model
    carry ``barriers``, the ordered nonzero sites, which enables truncation
    and the closed-form truncation difference.
    """

    def __init__(
        self,
        entries: Mapping[int, DiskCoefficient] | None = None,
        barriers: tuple[int, ...] | None = None,
    ):
        self._entries = dict(entries or {})
        for n in self._entries:
            if n < 0:
                raise ValueError(f"coefficient index must be nonnegative, got {n}")
        self.barriers = barriers

    @classmethod
    def zero(cls) -> "VerblunskySequence":
        return cls({}, barriers=())

    @classmethod
    def from_alphas(cls, alphas: Iterable[complex]) -> "VerblunskySequence":
        """Explicit list; indices beyond the list are zero."""
        entries = {}
        for n, a in enumerate(alphas):
            a = complex(a)
            if a != 0:
                entries[n] = DiskCoefficient.from_alpha(a)
        return cls(entries)

    def coefficient(self, n: int) -> DiskCoefficient:
        if n < 0:
            raise ValueError(f"coefficient index must be nonnegative, got {n}")
        return self._entries.get(n, ZERO_COEFFICIENT)

    @property
    def entries(self) -> dict[int, DiskCoefficient]:
        return dict(self._entries)

    @property
    def support_end(self) -> int:
        """Largest index with a nonzero alpha, or -1 for the free sequence."""
        ends = [n for n, c in self._entries.items() if c.alpha != 0]
        return max(ends) if ends else -1

    def window(self, size: int) -> tuple[np.ndarray, np.ndarray]:
        """(alpha, rho) arrays for indices 0..size-1."""
        alphas = np.zeros(size, dtype=np.complex128)
        rhos = np.ones(size, dtype=np.float64)
        for n, c in self._entries.items():
            if n < size:
                alphas[n] = c.alpha
                rhos[n] = c.rho
        return alphas, rhos

    def rotated(self, lam: complex) -> "VerblunskySequence":
        """Boundary rotation alpha_n -> lambda*alpha_n with |lambda| = 1."""
        return VerblunskySequence(
            {n: c.rotated(lam) for n, c in self._entries.items()}, self.barriers
        )


def truncate(seq: VerblunskySequence, N: int) -> VerblunskySequence:
    """Zero every coefficient beyond the N-th barrier site.

    The input must carry barrier metadata (sparse-model sequences do).  The
    all-zero sequence is its own truncation for every N.
    """
    if N < 1:
        raise ValueError(f"N must be positive, got {N}")
    if seq.support_end == -1:
        return seq
    if seq.barriers is None:
        raise TypeError("truncate needs a sparse-model sequence with barrier sites")
    if N > len(seq.barriers):
        raise IndexError(
            f"N={N} exceeds the {len(seq.barriers)} available barrier sites"
        )
    cut = seq.barriers[N - 1]
    kept = {n: c for n, c in seq.entries.items() if n <= cut}
    return VerblunskySequence(kept, barriers=seq.barriers[:N])


@dataclass
class StateVector:
    """Finite complex amplitude window with an implicit zero tail.

    ``frontier`` is the largest index that may be nonzero; everything beyond
    is exactly zero, which keeps light-cone supports exact.
    """

    amplitudes: np.ndarray
    frontier: int = 0

    @classmethod
    def basis(cls, n: int = 0, size: int = 64) -> "StateVector":
        if size <= n:
            raise ValueError(f"size {size} cannot hold basis index {n}")
        amp = np.zeros(size, dtype=np.complex128)
        amp[n] = 1.0
        return cls(amp, frontier=n)

    @property
    def size(self) -> int:
        return self.amplitudes.shape[0]

    def norm(self) -> float:
        x = self.amplitudes[: self.frontier + 1]
        return math.sqrt(math.fsum((x.real * x.real + x.imag * x.imag).tolist()))

    def probabilities(self) -> np.ndarray:
        x = self.amplitudes
        return x.real * x.real + x.imag * x.imag

    def grown(self, size: int) -> "StateVector":
        """Copy into a larger window (used when the light cone needs room)."""
        if size < self.size:
            raise ValueError("grown() cannot shrink a state")
        amp = np.zeros(size, dtype=np.complex128)
        amp[: self.size] = self.amplitudes
        return StateVector(amp, self.frontier)


@dataclass(frozen=True)
class CmvOperator:
    """A CMV operator restricted to the window 0..size-1, stored factored."""

    alphas: np.ndarray = field(repr=False)
    rhos: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return self.alphas.shape[0]

    def dense_factors(self) -> tuple[np.ndarray, np.ndarray]:
        """Dense (L, M) on an even-padded window two sites past ``size``."""
        dim = self.size + 2
        if dim % 2:
            dim += 1
        alphas = np.zeros(dim, dtype=np.complex128)
        rhos = np.ones(dim, dtype=np.float64)
        alphas[: self.size] = self.alphas
        rhos[: self.size] = self.rhos
        L = np.zeros((dim, dim), dtype=np.complex128)
        M = np.zeros((dim, dim), dtype=np.complex128)
        M[0, 0] = 1.0
        for j in range(0, dim - 1, 2):
            L[j : j + 2, j : j + 2] = theta_block(
                DiskCoefficient(alphas[j], rhos[j])
            )
        for j in range(1, dim - 1, 2):
            M[j : j + 2, j : j + 2] = theta_block(
                DiskCoefficient(alphas[j], rhos[j])
            )
        return L, M

    def dense(self) -> np.ndarray:
        """Entrywise window of the infinite operator (not unitary as a matrix)."""
        L, M = self.dense_factors()
        return (L @ M)[: self.size, : self.size]


def build_cmv(seq: VerblunskySequence, size: int) -> CmvOperator:
    """Operator window of the given size (size >= 2)."""
    if size < 2:
        raise ValueError(f"size must be at least 2, got {size}")
    alphas, rhos = seq.window(size)
    return CmvOperator(alphas, rhos)


def _check_room(op: CmvOperator, v: StateVector) -> None:
    if v.frontier + 2 >= op.size:
        raise TruncationOverflowError(
            f"frontier {v.frontier} needs window > {v.frontier + 2}, "
            f"operator holds {op.size} sites; regrow and retry"
        )


def ensure_window(
    seq: VerblunskySequence, op: CmvOperator, v: StateVector, margin: int = 4
) -> tuple[CmvOperator, StateVector]:
    """Double the retained window until the state has room to advance.

    Growth policy for open-ended iteration: when the frontier comes within
    ``margin`` sites of the window edge, rebuild the operator and copy the
    state into a doubled window (amortized O(1) per step; the light cone
    guarantees the copied tail is exact zero).
    """
    size = op.size
    while v.frontier + margin >= size:
        size *= 2
    if size == op.size:
        return op, v
    return build_cmv(seq, size), v.grown(size)


def apply(op: CmvOperator, v: StateVector) -> StateVector:
    """C v as two block sweeps; the frontier grows by at most 2."""
    _check_room(op, v)
    amp = v.amplitudes.copy()
    f = lm_apply(op.alphas, op.rhos, amp, v.frontier)
    return StateVector(amp, f)


def apply_adjoint(op: CmvOperator, v: StateVector) -> StateVector:
    """C* v; same window contract as ``apply``."""
    _check_room(op, v)
    amp = v.amplitudes.copy()
    f = lm_apply_adjoint(op.alphas, op.rhos, amp, v.frontier)
    return StateVector(amp, f)


def _difference_into(
    seq: VerblunskySequence, N: int, phi: np.ndarray, out: np.ndarray
) -> None:
    barriers = seq.barriers
    entries = seq.entries
    npts = phi.shape[0]

    def read(i: int) -> complex:
        return phi[i] if 0 <= i < npts else 0.0

    for m in barriers[N:]:
        if m > npts:
            continue  # every site this barrier reads is past phi's support
        c = entries.get(m)
        if c is None or c.alpha == 0:
            continue
        a, r = c.alpha, c.rho
        if m % 2 == 0:
            lo, hi = read(m - 1), read(m + 2)
            out[m] += np.conj(a) * lo + (r - 1.0) * hi
            out[m + 1] += (r - 1.0) * lo - a * hi
        else:
            lo, hi = read(m), read(m + 1)
            out[m - 1] += np.conj(a) * lo + (r - 1.0) * hi
            out[m + 2] += (r - 1.0) * lo - a * hi


def operator_difference_apply(
    seq: VerblunskySequence, N: int, phi: StateVector
) -> StateVector:
    """(C - C_N) phi in closed form, where C_N zeroes barriers beyond the N-th.

    The difference touches phi only near the dropped barrier sites, so the
    result is assembled barrier by barrier without forming either operator.
    Requires consecutive barriers from the N-th on to sit at least two sites
    apart (otherwise the per-barrier blocks overlap and the closed form is
    invalid).
    """
    if N < 1:
        raise ValueError(f"N must be positive, got {N}")
    if seq.support_end == -1:
        return StateVector(np.zeros_like(phi.amplitudes), 0)
    if seq.barriers is None:
        raise TypeError(
            "operator_difference_apply needs a sparse-model sequence with barrier sites"
        )
    if N > len(seq.barriers):
        raise IndexError(
            f"N={N} exceeds the {len(seq.barriers)} available barrier sites"
        )
    for k in range(N - 1, len(seq.barriers) - 1):
        gap = seq.barriers[k + 1] - seq.barriers[k]
        if gap < 2:
            raise PreconditionError(
                f"barriers {seq.barriers[k]} and {seq.barriers[k + 1]} are only "
                f"{gap} apart; the closed-form difference needs spacing >= 2"
            )
    out = np.zeros(phi.size + 3, dtype=np.complex128)
    _difference_into(seq, N, phi.amplitudes, out)
    nz = np.nonzero(out)[0]
    frontier = int(nz[-1]) if nz.size else 0
    return StateVector(out, frontier)
