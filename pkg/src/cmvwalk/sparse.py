"""Sparse high-barrier coefficient sequences and their walk-coin counterparts.

The model places a single nonzero Verblunsky coefficient at each site of a
rapidly growing integer sequence L_1 < L_2 < ..., with

    rho = L^(-(1-eta)/(2*eta)),   alpha = lambda * sqrt(1 - rho^2),

for a tunneling parameter eta in (0, 1) and an optional boundary phase
lambda on the unit circle.  The sparseness diagnostic

    nu_N = log(L_1 ... L_{N-1}) / log(L_N)

is computed in log space; the products overflow fixed-width integers
immediately.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cmv import DiskCoefficient, VerblunskySequence

__all__ = [
    "SparseSpec",
    "CoinSpec",
    "nu",
    "barrier_coefficient",
    "verblunsky",
    "coin_sequence",
    "reflector_coin",
    "so2_coin",
]


def _barrier_rho(L: int, eta: float) -> float:
    """rho = L^(-(1-eta)/(2*eta)), robust to L beyond float range."""
    exponent = -(1.0 - eta) / (2.0 * eta)
    try:
        return float(L) ** exponent
    except OverflowError:
        return math.exp(exponent * math.log(L))


@dataclass(frozen=True)
class SparseSpec:
    """Barrier sites, tunneling parameter, and boundary phase."""

    eta: float
    lengths: tuple[int, ...]
    lambda_phase: complex = 1.0

    def __post_init__(self):
        if not (0.0 < self.eta < 1.0):
            raise ValueError(f"eta must lie in (0, 1), got {self.eta}")
        object.__setattr__(self, "lengths", tuple(int(L) for L in self.lengths))
        if not self.lengths:
            raise ValueError("at least one barrier site is required")
        if self.lengths[0] < 1:
            raise ValueError(f"barrier sites start at 1, got {self.lengths[0]}")
        for a, b in zip(self.lengths, self.lengths[1:]):
            if b <= a:
                raise ValueError(f"barrier sites must increase strictly: {a} !< {b}")
        if abs(abs(self.lambda_phase) - 1.0) > 1e-12:
            raise ValueError(
                f"lambda_phase must be unimodular, got |lambda|={abs(self.lambda_phase)}"
            )

    @classmethod
    def default(cls, eta: float = 0.5, count: int = 4, lambda_phase: complex = 1.0):
        """Desk-scale sequence log2(L_j) = j!, i.e. 2, 4, 64, 2^24, ..."""
        lengths = [2 ** math.factorial(j) for j in range(1, count + 1)]
        return cls(eta, tuple(lengths), lambda_phase)


def nu(spec: SparseSpec, N: int) -> float:
    """Sparseness ratio log(L_1...L_{N-1})/log(L_N); the empty product gives 0."""
    if N < 1:
        raise ValueError(f"N must be positive, got {N}")
    if N > len(spec.lengths):
        raise IndexError(f"N={N} exceeds the {len(spec.lengths)} available sites")
    if N == 1:
        return 0.0
    L_N = spec.lengths[N - 1]
    if L_N == 1:
        raise ZeroDivisionError("nu is undefined when log(L_N) = 0")
    numerator = math.fsum(math.log(L) for L in spec.lengths[: N - 1])
    return numerator / math.log(L_N)


def barrier_coefficient(L: int, eta: float) -> DiskCoefficient:
    """Coefficient placed at a barrier of size L: rho exact, alpha derived."""
    if L < 1:
        raise ValueError(f"barrier size must be at least 1, got {L}")
    if not (0.0 < eta < 1.0):
        raise ValueError(f"eta must lie in (0, 1), got {eta}")
    return DiskCoefficient.from_rho(_barrier_rho(L, eta))


def verblunsky(spec: SparseSpec) -> VerblunskySequence:
    """The model's coefficient sequence; nonzero only at the barrier sites."""
    entries = {}
    for L in spec.lengths:
        entries[L] = DiskCoefficient.from_rho(
            _barrier_rho(L, spec.eta), phase=spec.lambda_phase
        )
    return VerblunskySequence(entries, barriers=spec.lengths)


def so2_coin(r: float) -> np.ndarray:
    """Rotation coin [[r, -s], [s, r]] with s = sqrt(1 - r^2), r in [0, 1]."""
    if not (0.0 <= r <= 1.0):
        raise ValueError(f"reflectivity parameter must lie in [0, 1], got {r}")
    s = math.sqrt(1.0 - r * r)
    return np.array([[r, -s], [s, r]], dtype=np.complex128)


def reflector_coin() -> np.ndarray:
    """The perfect reflector [[0, -1], [1, 0]] (the r -> 0 limit of so2_coin)."""
    return so2_coin(0.0)


@dataclass(frozen=True)
class CoinSpec:
    """Walk coins for the sparse model: rotation coins at the barrier sites.

    The coin at walk site L_j is so2_coin(r_j) with
    r_j = (2 L_j - 1)^(-(1-eta)/(2*eta)); every other site gets the identity.
    """

    eta: float
    sites: tuple[int, ...]
    reflectivities: tuple[float, ...]

    def __post_init__(self):
        for r in self.reflectivities:
            if not (0.0 < r <= 1.0):
                raise ValueError(f"reflectivity must lie in (0, 1], got {r}")

    def coin(self, n: int) -> np.ndarray:
        """The 2x2 coin at walk site n >= 1."""
        if n < 1:
            raise ValueError(f"coins live at walk sites >= 1, got {n}")
        try:
            j = self.sites.index(n)
        except ValueError:
            return np.eye(2, dtype=np.complex128)
        return so2_coin(self.reflectivities[j])

    def coin_map(self) -> dict[int, np.ndarray]:
        """Only the non-identity coins, keyed by walk site."""
        return {n: so2_coin(r) for n, r in zip(self.sites, self.reflectivities)}


def coin_sequence(spec: SparseSpec) -> CoinSpec:
    """Coins whose walk reproduces the sparse model's transport."""
    rs = tuple(_barrier_rho(2 * L - 1, spec.eta) for L in spec.lengths)
    return CoinSpec(spec.eta, spec.lengths, rs)
