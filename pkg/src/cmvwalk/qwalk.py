"""Coined quantum walks on the half line and their CMV correspondence.

State space: a spin-1/2 amplitude at every positive site plus a single
down-spin amplitude at the origin.  The ordered basis is

    phi_0 = |0, down>,  phi_{2m-1} = |m, up>,  phi_{2m} = |m, down>  (m >= 1),

and one walk step sends |n, up> / |n, down> through the 2x2 coin at site n
before shifting up-spin right and down-spin left.  The origin carries the
fixed boundary coin [[0, 1], [-1, 0]].

In this basis the walk matrix has nonzero entries only where a CMV matrix
with vanishing even-indexed coefficients does.  Coins with a real positive
diagonal match entrywise under alpha_{2m-1} = conj(c21_m), rho_{2m-1} = c22_m;
general unitary coins match after conjugation by a diagonal phase gauge,
constructed greedily site by site below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .cmv import DiskCoefficient, VerblunskySequence
from .dynamics import MomentCurve, TimeAverage, abel_averages, abel_t_max, moment
from .errors import UnsupportedCoinError
from .sparse import SparseSpec, coin_sequence

__all__ = [
    "BOUNDARY_COIN",
    "WalkOperator",
    "build_walk",
    "coins_to_cmv",
    "gauge_transform",
    "walk_site_marginal",
    "walk_exponents",
    "walk_moment_direct",
]

BOUNDARY_COIN = np.array([[0.0, 1.0], [-1.0, 0.0]], dtype=np.complex128)

_UNITARY_TOL = 1e-14


def _as_coin_map(coins) -> dict[int, np.ndarray]:
    """Accept {site: coin} or a list for sites 1, 2, ...; validate unitarity."""
    if isinstance(coins, Mapping):
        items = coins.items()
    else:
        items = enumerate(coins, start=1)
    out: dict[int, np.ndarray] = {}
    for site, coin in items:
        if site < 1:
            raise ValueError(f"coins live at walk sites >= 1, got {site}")
        c = np.asarray(coin, dtype=np.complex128)
        if c.shape != (2, 2):
            raise ValueError(f"coin at site {site} is not 2x2")
        defect = np.max(np.abs(c @ c.conj().T - np.eye(2)))
        if defect > _UNITARY_TOL:
            raise ValueError(
                f"coin at site {site} is not unitary (defect {defect:.2e})"
            )
        out[site] = c
    return out


@dataclass(frozen=True)
class WalkOperator:
    """One walk step over the ordered half-line basis."""

    coin_map: dict[int, np.ndarray] = field(repr=False)

    def coin(self, site: int) -> np.ndarray:
        if site == 0:
            return BOUNDARY_COIN
        return self.coin_map.get(site, np.eye(2, dtype=np.complex128))

    def dense(self, size: int) -> np.ndarray:
        """The size x size corner of the walk matrix."""
        U = np.zeros((size, size), dtype=np.complex128)

        def put(i, j, value):
            if i < size and j < size:
                U[i, j] = value

        put(1, 0, 1.0)  # boundary coin sends phi_0 to phi_1
        m_max = (size + 2) // 2
        for m in range(1, m_max + 1):
            c = self.coin(m)
            put(2 * m + 1, 2 * m - 1, c[0, 0])
            put(2 * m - 2, 2 * m - 1, c[1, 0])
            put(2 * m + 1, 2 * m, c[0, 1])
            put(2 * m - 2, 2 * m, c[1, 1])
        return U


def build_walk(coins) -> WalkOperator:
    """Walk operator from unitary coins ({site: 2x2} or a list for sites 1..)."""
    return WalkOperator(_as_coin_map(coins))


def coins_to_cmv(coins) -> VerblunskySequence:
    """Coefficients whose CMV matrix equals the walk matrix entrywise.

    Requires every coin diagonal to be real positive (rotation coins are);
    other unitary coins need ``gauge_transform``.  A vanishing diagonal
    (perfect reflector) has no disk coefficient at all.
    """
    coin_map = _as_coin_map(coins)
    entries: dict[int, DiskCoefficient] = {}
    barriers = []
    for site in sorted(coin_map):
        c = coin_map[site]
        c11, c22 = c[0, 0], c[1, 1]
        if c11 == 0 and c22 == 0:
            raise UnsupportedCoinError(
                f"coin at site {site} is a perfect reflector (rho = 0)"
            )
        if c11.imag != 0 or c22.imag != 0 or c11 != c22 or c11.real <= 0:
            raise UnsupportedCoinError(
                f"coin at site {site} lacks a real positive diagonal; "
                "use gauge_transform"
            )
        alpha = np.conj(c[1, 0])
        if alpha == 0:
            continue
        entries[2 * site - 1] = DiskCoefficient(complex(alpha), float(c22.real))
        barriers.append(2 * site - 1)
    return VerblunskySequence(entries, barriers=tuple(barriers))


def gauge_transform(coins) -> tuple[VerblunskySequence, np.ndarray]:
    """Diagonal phases Lambda and coefficients with Lambda* U Lambda = C.

    Phases are chosen greedily in basis order: each new basis vector is
    rotated so the designated rho entry comes out real positive.  Returns
    (sequence, phases) with phases[0] = 1 covering indices 0..2*M+1 for M
    coin sites.
    """
    coin_map = _as_coin_map(coins)
    m_max = max(coin_map, default=0)
    lam = np.ones(2 * m_max + 2, dtype=np.complex128)
    entries: dict[int, DiskCoefficient] = {}
    barriers = []

    def div_real(x: complex, r: float) -> complex:
        # componentwise division: numpy's complex-by-scalar division takes
        # the full complex path and loses the exactness of r/r = 1
        return complex(x.real / r, x.imag / r)

    def unit(x: complex) -> complex:
        # pin each phase back to the circle so modulus drift cannot
        # accumulate along the recursion
        m = abs(x)
        return x if m == 1.0 else div_real(x, m)

    for m in range(1, m_max + 1):
        c = coin_map.get(m, np.eye(2, dtype=np.complex128))
        c11, c21, c22 = complex(c[0, 0]), complex(c[1, 0]), complex(c[1, 1])
        rho = abs(c22)
        if rho == 0.0:
            raise UnsupportedCoinError(
                f"coin at site {m} is a perfect reflector (rho = 0)"
            )
        lam[2 * m] = unit(lam[2 * m - 2] * div_real(c22.conjugate(), rho))
        alpha = lam[2 * m - 2] * c21.conjugate() * np.conj(lam[2 * m - 1])
        lam[2 * m + 1] = unit(div_real(c11 * complex(lam[2 * m - 1]), rho))
        if alpha != 0:
            entries[2 * m - 1] = DiskCoefficient(complex(alpha), float(rho))
            barriers.append(2 * m - 1)
    return VerblunskySequence(entries, barriers=tuple(barriers)), lam


def walk_site_marginal(atilde: np.ndarray) -> np.ndarray:
    """Fold basis-index weights onto walk sites: m <- {2m-1, 2m}, 0 <- 0."""
    n = atilde.shape[0]
    sites = (n + 2) // 2
    out = np.zeros(sites, dtype=np.float64)
    out[0] = atilde[0]
    for m in range(1, sites):
        up = 2 * m - 1
        down = 2 * m
        if up < n:
            out[m] += atilde[up]
        if down < n:
            out[m] += atilde[down]
    return out


def walk_exponents(
    spec: SparseSpec, p: float, times: Sequence[float]
) -> MomentCurve:
    """Transport exponents of the sparse-coin walk, via its CMV form.

    Moments are taken in the walk position observable (site m), folding the
    paired basis indices 2m-1, 2m onto m before summing.
    """
    times = np.asarray([float(T) for T in times])
    if np.any(np.diff(times) <= 0) or times[0] <= 1.0:
        raise ValueError("need a strictly increasing grid of time scales > 1")
    seq = coins_to_cmv(coin_sequence(spec).coin_map())
    averages = abel_averages(seq, list(times))
    moments = np.array(
        [
            moment(TimeAverage(ta.T, walk_site_marginal(ta.atilde), ta.tail_bound), p)
            for ta in averages
        ]
    )
    slopes = np.log(moments) / (p * np.log(times))
    logs = np.log(times)
    mid = 0.5 * (logs[0] + logs[-1])
    mask = logs >= mid
    return MomentCurve(
        p=p,
        times=times,
        moments=moments,
        slopes=slopes,
        window=(float(math.exp(mid)), float(times[-1])),
        beta_minus_proxy=float(np.min(slopes[mask])),
        beta_plus_proxy=float(np.max(slopes[mask])),
        theory_beta_minus=(p + 1.0) / (p + 1.0 / spec.eta),
    )


def walk_moment_direct(
    coins, p: float, T: float, *, n_basis: int | None = None
) -> float:
    """<|X|^p>(T) for the walk itself, by dense evolution in the walk basis.

    Reference route for cross-checking the CMV delegation; cost grows with
    T, so keep T moderate.
    """
    t_max = abel_t_max(T)
    if n_basis is None:
        n_basis = 2 * t_max + 6
    U = build_walk(coins).dense(n_basis)
    psi = np.zeros(n_basis, dtype=np.complex128)
    psi[0] = 1.0
    acc = np.zeros(n_basis, dtype=np.float64)
    pref = -math.expm1(-2.0 / T)
    for t in range(t_max + 1):
        if t > 0:
            psi = U @ psi
        w = pref * math.exp(-2.0 * t / T)
        acc += w * (psi.real**2 + psi.imag**2)
    marginal = walk_site_marginal(acc)
    return math.fsum(
        (float(m) ** p + 1.0) * marginal[m]
        for m in range(marginal.shape[0] - 1, -1, -1)
    )
