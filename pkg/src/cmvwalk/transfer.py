"""One-step transfer matrices, cocycles, polynomial pairs, local norms.

Two 2x2 systems propagate solution data along the half line:

* the solution cocycle Z(n, m; z), built from the one-step matrices
  P (even sites) and Q (odd sites), which moves pairs (u(n), v(n)) of a
  generalized eigenvalue problem C u = z u with v = M u;
* the polynomial transfer matrices S(alpha, z), whose ordered products
  applied to (1, 1) and (1, -1) generate the first- and second-kind
  orthogonal polynomial pairs.

Ordered products renormalize whenever the running Frobenius norm passes
1e150, banking the magnitude in a separate log-scale accumulator: barrier
steps multiply norms by L^{(1-eta)/(2 eta)} and would otherwise overflow.
Operator norms come from the closed-form 2x2 singular value.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .cmv import DiskCoefficient, VerblunskySequence
from .sparse import SparseSpec, verblunsky

__all__ = [
    "TransferMatrix",
    "PolynomialPair",
    "LocalNorm",
    "SubordinacyDiagnostic",
    "gz_p",
    "gz_q",
    "gz_step",
    "gz_cocycle",
    "gz_norm_profile",
    "szego_s",
    "szego_t",
    "opuc_pair",
    "local_norm",
    "subordinacy_ratio",
]

_RENORM_AT = 1e150


def _sigma_max(mat: np.ndarray) -> float:
    """Largest singular value of a 2x2 matrix, closed form.

    Entries are prescaled by the largest modulus so the sum of squares
    cannot overflow for matrices far below the float ceiling.
    """
    scale = float(np.max(np.abs(mat)))
    if scale == 0.0 or not math.isfinite(scale):
        return scale
    m = mat / scale
    t = float(np.sum(m.real**2 + m.imag**2))
    d = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    disc = math.sqrt(max(t * t - 4.0 * (d.real**2 + d.imag**2), 0.0))
    return scale * math.sqrt(0.5 * (t + disc))


@dataclass(frozen=True)
class TransferMatrix:
    """A 2x2 complex matrix with its magnitude banked in log scale."""

    mat: np.ndarray
    log_scale: float = 0.0

    def matrix(self) -> np.ndarray:
        """The plain 2x2 matrix; overflows if log_scale is huge."""
        return self.mat * math.exp(self.log_scale)

    def norm(self) -> float:
        return _sigma_max(self.mat) * math.exp(self.log_scale)

    def log_norm(self) -> float:
        return math.log(_sigma_max(self.mat)) + self.log_scale

    def det(self) -> complex:
        d = self.mat[0, 0] * self.mat[1, 1] - self.mat[0, 1] * self.mat[1, 0]
        return complex(d) * math.exp(2.0 * self.log_scale)

    def compose(self, other: "TransferMatrix") -> "TransferMatrix":
        """self @ other, renormalizing when entries grow past 1e150."""
        mat = self.mat @ other.mat
        scale = self.log_scale + other.log_scale
        biggest = float(np.max(np.abs(mat)))
        if biggest > _RENORM_AT:
            mat = mat / biggest
            scale += math.log(biggest)
        return TransferMatrix(mat, scale)


def _inv2(mat: np.ndarray) -> np.ndarray:
    d = mat[0, 0] * mat[1, 1] - mat[0, 1] * mat[1, 0]
    return np.array(
        [[mat[1, 1], -mat[0, 1]], [-mat[1, 0], mat[0, 0]]], dtype=np.complex128
    ) / d


def gz_p(c: DiskCoefficient, z: complex) -> TransferMatrix:
    """Even-site step (1/rho) [[-alpha, 1/z], [z, -conj(alpha)]]; det = -1."""
    if z == 0:
        raise ValueError("the one-step matrices need z != 0")
    a, r = c.alpha, c.rho
    return TransferMatrix(
        np.array([[-a, 1.0 / z], [z, -np.conj(a)]], dtype=np.complex128) / r
    )


def gz_q(c: DiskCoefficient, z: complex) -> TransferMatrix:
    """Odd-site step (1/rho) [[-conj(alpha), 1], [1, -alpha]]; det = -1."""
    if z == 0:
        raise ValueError("the one-step matrices need z != 0")
    a, r = c.alpha, c.rho
    return TransferMatrix(
        np.array([[-np.conj(a), 1.0], [1.0, -a]], dtype=np.complex128) / r
    )


def gz_step(seq: VerblunskySequence, n: int, z: complex) -> TransferMatrix:
    """Y(n, z): Q at odd sites, P at even sites."""
    c = seq.coefficient(n)
    return gz_q(c, z) if n % 2 else gz_p(c, z)


def gz_cocycle(
    seq: VerblunskySequence, n: int, m: int, z: complex
) -> TransferMatrix:
    """Z(n, m; z): the ordered step product moving solution pairs m -> n."""
    if z == 0:
        raise ValueError("the cocycle needs z != 0")
    if n < 0 or m < 0:
        raise ValueError("cocycle indices must be nonnegative")
    if n == m:
        return TransferMatrix(np.eye(2, dtype=np.complex128))
    if n > m:
        acc = gz_step(seq, m, z)
        for k in range(m + 1, n):
            acc = gz_step(seq, k, z).compose(acc)
        return acc
    acc = TransferMatrix(_inv2(gz_step(seq, n, z).mat))
    for k in range(n + 1, m):
        acc = acc.compose(TransferMatrix(_inv2(gz_step(seq, k, z).mat)))
    return acc


def gz_norm_profile(
    spec: SparseSpec, epsilon: float, n_max: int, theta: float = 0.0
) -> tuple[np.ndarray, np.ndarray]:
    """log ||Z(n, 0; z)|| for n = 0..n_max at z = e^{i theta + epsilon}.

    Also returns the step-product bound: epsilon per free step (free steps
    have norm at most e^epsilon) plus the actual barrier step norms.
    """
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    z = cmath.exp(1j * theta + epsilon)
    seq = verblunsky(spec)
    barriers = set(spec.lengths)
    log_norms = np.zeros(n_max + 1)
    bound = np.zeros(n_max + 1)
    acc = TransferMatrix(np.eye(2, dtype=np.complex128))
    running_bound = 0.0
    for n in range(1, n_max + 1):
        step = gz_step(seq, n - 1, z)
        acc = step.compose(acc)
        running_bound += step.log_norm() if (n - 1) in barriers else epsilon
        log_norms[n] = acc.log_norm()
        bound[n] = running_bound
    return log_norms, bound


def szego_s(c: DiskCoefficient, z: complex) -> TransferMatrix:
    """Polynomial step (1/rho) [[z, -conj(alpha)], [-alpha z, 1]]; det = z."""
    a, r = c.alpha, c.rho
    return TransferMatrix(
        np.array([[z, -np.conj(a)], [-a * z, 1.0]], dtype=np.complex128) / r
    )


def szego_t(seq: VerblunskySequence, n: int, z: complex) -> TransferMatrix:
    """Ordered product T(n, 0; z) = S(alpha_{n-1}) ... S(alpha_0)."""
    if n < 0:
        raise ValueError(f"n must be nonnegative, got {n}")
    acc = TransferMatrix(np.eye(2, dtype=np.complex128))
    for k in range(n):
        acc = szego_s(seq.coefficient(k), z).compose(acc)
    return acc


@dataclass(frozen=True)
class PolynomialPair:
    """First/second-kind polynomial values at one (n, z)."""

    n: int
    z: complex
    phi: complex
    phi_star: complex
    psi: complex
    psi_star: complex


def opuc_pair(seq: VerblunskySequence, n: int, z: complex) -> PolynomialPair:
    """(phi_n, phi*_n) = T(n,0;z)(1,1); (psi_n, psi*_n) = T(n,0;z)(1,-1)."""
    first = np.array([1.0, 1.0], dtype=np.complex128)
    second = np.array([1.0, -1.0], dtype=np.complex128)
    for k in range(n):
        s = szego_s(seq.coefficient(k), z).mat
        first = s @ first
        second = s @ second
    return PolynomialPair(
        n=n,
        z=z,
        phi=complex(first[0]),
        phi_star=complex(first[1]),
        psi=complex(second[0]),
        psi_star=complex(second[1]),
    )


@dataclass(frozen=True)
class LocalNorm:
    """Interpolated partial sum of squares up to a fractional cutoff m."""

    m: float
    value: float  # the squared local norm


def local_norm(a: Sequence[complex] | np.ndarray, m: float) -> LocalNorm:
    """Squared local norm: full terms through floor(m) plus a {m}-weighted one."""
    if m < 0:
        raise ValueError(f"m must be nonnegative, got {m}")
    arr = np.asarray(a)
    lo = int(math.floor(m))
    frac = m - lo
    if arr.shape[0] < lo + 1 or (frac > 0 and arr.shape[0] < lo + 2):
        raise IndexError(
            f"sequence of length {arr.shape[0]} is too short for m={m}"
        )
    sq = np.abs(arr[: lo + 1]) ** 2
    value = math.fsum(sq.tolist())
    if frac > 0:
        value += frac * abs(arr[lo + 1]) ** 2
    return LocalNorm(m, value)


@dataclass(frozen=True)
class SubordinacyDiagnostic:
    """Growth comparison of the two polynomial families along a cutoff grid."""

    m_grid: np.ndarray
    ratios: np.ndarray
    running_min: np.ndarray
    beta: float
    delta: float


def subordinacy_ratio(
    spec: SparseSpec, z: complex, delta: float, m_grid: Sequence[float]
) -> SubordinacyDiagnostic:
    """||phi||^2_m / (||psi||^2_m)^{beta - delta} with beta = eta/(2 - eta).

    The running minimum along the grid is the bounded-below proxy for the
    liminf positivity that subordinacy arguments need.
    """
    beta = spec.eta / (2.0 - spec.eta)
    if not (0.0 < delta < beta):
        raise ValueError(f"delta must lie in (0, beta={beta}), got {delta}")
    m_grid = np.asarray([float(m) for m in m_grid])
    if np.any(m_grid < 0) or np.any(np.diff(m_grid) <= 0):
        raise ValueError("m_grid must be nonnegative and strictly increasing")
    seq = verblunsky(spec)
    top = int(math.floor(m_grid[-1])) + 2
    phi = np.empty(top, dtype=np.complex128)
    psi = np.empty(top, dtype=np.complex128)
    first = np.array([1.0, 1.0], dtype=np.complex128)
    second = np.array([1.0, -1.0], dtype=np.complex128)
    phi[0], psi[0] = first[0], second[0]
    for k in range(top - 1):
        s = szego_s(seq.coefficient(k), z).mat
        first = s @ first
        second = s @ second
        phi[k + 1], psi[k + 1] = first[0], second[0]
    ratios = np.empty(m_grid.shape[0])
    for i, m in enumerate(m_grid):
        num = local_norm(phi, m).value
        den = local_norm(psi, m).value
        ratios[i] = num / den ** (beta - delta)
    return SubordinacyDiagnostic(
        m_grid=m_grid,
        ratios=ratios,
        running_min=np.minimum.accumulate(ratios),
        beta=beta,
        delta=delta,
    )
