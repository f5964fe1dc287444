"""Wavepacket evolution and time-averaged transport statistics.

The initial state is always delta_0.  Site probabilities a(n, t) come from
iterating the factored operator; exponentially time-averaged probabilities

    atilde(n, T) = (1 - e^{-2/T}) * sum_t e^{-2t/T} a(n, t)

are accumulated in a single streaming pass with compensated summation, so
horizons of ~2e4 steps never materialize a (t, n) table.  The infinite time
sum is truncated once the geometric weights have shed a relative mass of
1e-16; every average carries the resulting tail bound.

Moments use the regularized weight (n^p + 1), so they are bounded below
by 1 and the normalized slope log<|X|^p>(T) / (p log T) is well defined.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from ._accel import abel_accumulate, lm_apply, probabilities_into
from .cmv import StateVector, VerblunskySequence
from .errors import PreconditionError, ResourceLimitError

__all__ = [
    "ABEL_TAIL",
    "EvolutionRecord",
    "TimeAverage",
    "MomentCurve",
    "abel_t_max",
    "evolve",
    "iterate_states",
    "return_amplitudes",
    "time_averaged_prob",
    "abel_average",
    "abel_averages",
    "inside_prob",
    "outside_prob",
    "moment",
    "exponent_curve",
]

ABEL_TAIL = 1e-16


def abel_t_max(T: float) -> int:
    """Steps needed before the geometric weights fall below ABEL_TAIL."""
    return math.ceil(T * math.log(1.0 / ABEL_TAIL) / 2.0)


def _window_for(t_max: int) -> int:
    # light cone reaches site 2t; two spare sites keep the sweeps interior
    return 2 * t_max + 8


@dataclass
class EvolutionRecord:
    """Site probabilities a(n, t) for t = 0..t_max plus the return amplitudes."""

    probs: np.ndarray
    return_amps: np.ndarray
    t_max: int

    @property
    def width(self) -> int:
        return self.probs.shape[1]

    def site_sums(self) -> np.ndarray:
        """sum_n a(n, t) per t; unitarity keeps these at 1."""
        return np.array([math.fsum(row.tolist()) for row in self.probs])


def _evolution_arrays(seq: VerblunskySequence, t_max: int):
    width = _window_for(t_max)
    a, r = seq.window(width)
    v = np.zeros(width, dtype=np.complex128)
    v[0] = 1.0
    return a, r, v


def evolve(
    seq: VerblunskySequence, t_max: int, *, max_bytes: int = 2**30
) -> EvolutionRecord:
    """Record a(n, t) for t <= t_max on the light-cone window 2*t_max + 8.

    Raises ResourceLimitError (with the largest feasible horizon) when the
    probability table would not fit in ``max_bytes``.
    """
    if t_max < 0:
        raise ValueError(f"t_max must be nonnegative, got {t_max}")
    width = _window_for(t_max)
    needed = (t_max + 1) * width * 8
    if needed > max_bytes:
        feasible = int(math.sqrt(max_bytes / 16.0)) - 3
        raise ResourceLimitError(
            f"a {t_max + 1} x {width} probability table needs {needed} bytes "
            f"(budget {max_bytes}); t_max={max(feasible, 0)} is feasible",
            feasible_t_max=max(feasible, 0),
        )
    a, r, v = _evolution_arrays(seq, t_max)
    probs = np.zeros((t_max + 1, width), dtype=np.float64)
    ret = np.zeros(t_max + 1, dtype=np.complex128)
    probs[0, 0] = 1.0
    ret[0] = 1.0
    f = 0
    for t in range(1, t_max + 1):
        f = lm_apply(a, r, v, f)
        probabilities_into(probs[t], v, f)
        ret[t] = v[0]
    return EvolutionRecord(probs, ret, t_max)


def iterate_states(
    seq: VerblunskySequence, t_max: int
) -> Iterator[tuple[int, StateVector]]:
    """Yield (t, state) for t = 0..t_max without storing history.

    The yielded StateVector wraps the working buffer and is overwritten by
    the next step; copy it if it must outlive the iteration.
    """
    a, r, v = _evolution_arrays(seq, t_max)
    state = StateVector(v, 0)
    yield 0, state
    f = 0
    for t in range(1, t_max + 1):
        f = lm_apply(a, r, v, f)
        state.frontier = f
        yield t, state


def return_amplitudes(seq: VerblunskySequence, t_max: int) -> np.ndarray:
    """<delta_0, C^t delta_0> for t = 0..t_max, streamed."""
    out = np.zeros(t_max + 1, dtype=np.complex128)
    for t, state in iterate_states(seq, t_max):
        out[t] = state.amplitudes[0]
    return out


@dataclass
class TimeAverage:
    """Exponentially averaged site distribution at time scale T."""

    T: float
    atilde: np.ndarray
    tail_bound: float

    def total(self) -> float:
        return math.fsum(self.atilde.tolist())


def _abel_weights(T: float, t_max: int) -> np.ndarray:
    t = np.arange(t_max + 1, dtype=np.float64)
    return -np.expm1(-2.0 / T) * np.exp(-2.0 * t / T)


def time_averaged_prob(rec: EvolutionRecord, T: float) -> TimeAverage:
    """Average a recorded evolution; the record must cover abel_t_max(T)."""
    if T <= 0:
        raise ValueError(f"T must be positive, got {T}")
    need = abel_t_max(T)
    if rec.t_max < need:
        raise PreconditionError(
            f"record holds t_max={rec.t_max} but T={T} needs t_max={need}",
            required_t_max=need,
        )
    w = _abel_weights(T, need)
    acc = np.zeros(rec.width, dtype=np.float64)
    comp = np.zeros(rec.width, dtype=np.float64)
    for t in range(need + 1):
        p = w[t] * rec.probs[t]
        y = p - comp
        s = acc + y
        comp = (s - acc) - y
        acc = s
    return TimeAverage(T, acc, math.exp(-2.0 * need / T))


def abel_averages(
    seq: VerblunskySequence, Ts: Sequence[float]
) -> list[TimeAverage]:
    """Averages for several time scales from one streaming evolution pass."""
    Ts = [float(T) for T in Ts]
    if not Ts:
        raise ValueError("at least one time scale is required")
    if any(T <= 0 for T in Ts):
        raise ValueError("time scales must be positive")
    needs = [abel_t_max(T) for T in Ts]
    t_max = max(needs)
    width = _window_for(t_max)
    a, r, v = _evolution_arrays(seq, t_max)
    accs = [np.zeros(width, dtype=np.float64) for _ in Ts]
    comps = [np.zeros(width, dtype=np.float64) for _ in Ts]
    prefs = [-math.expm1(-2.0 / T) for T in Ts]
    f = 0
    for t in range(t_max + 1):
        if t > 0:
            f = lm_apply(a, r, v, f)
        for k, T in enumerate(Ts):
            if t <= needs[k]:
                abel_accumulate(
                    accs[k], comps[k], v, f, prefs[k] * math.exp(-2.0 * t / T)
                )
    return [
        TimeAverage(T, acc, math.exp(-2.0 * need / T))
        for T, acc, need in zip(Ts, accs, needs)
    ]


def abel_average(seq: VerblunskySequence, T: float) -> TimeAverage:
    return abel_averages(seq, [T])[0]


def outside_prob(ta: TimeAverage, M: float) -> float:
    """Mass on {n >= M}; M may be fractional, the site set is taken strictly."""
    if M < 0:
        raise ValueError(f"M must be nonnegative, got {M}")
    start = max(int(math.ceil(M)), 0)
    return math.fsum(ta.atilde[start:].tolist())


def inside_prob(ta: TimeAverage, M: float) -> float:
    """Mass on {n < M}; complements outside_prob up to the tail bound."""
    if M < 0:
        raise ValueError(f"M must be nonnegative, got {M}")
    start = max(int(math.ceil(M)), 0)
    return math.fsum(ta.atilde[:start].tolist())


def moment(ta: TimeAverage, p: float) -> float:
    """<|X|^p>(T) = sum_n (n^p + 1) atilde(n), summed from large n down."""
    if p <= 0:
        raise ValueError(f"p must be positive, got {p}")
    at = ta.atilde
    return math.fsum(
        (float(n) ** p + 1.0) * at[n] for n in range(at.shape[0] - 1, -1, -1)
    )


@dataclass
class MomentCurve:
    """Moments and normalized slopes along a grid of time scales.

    The liminf/limsup proxies take the extreme slopes over the trailing half
    of the grid in log T; ``window`` records the range they were read from.
    """

    p: float
    times: np.ndarray
    moments: np.ndarray
    slopes: np.ndarray
    window: tuple[float, float]
    beta_minus_proxy: float
    beta_plus_proxy: float
    theory_beta_minus: float | None = None


def exponent_curve(
    seq: VerblunskySequence,
    p: float,
    times: Sequence[float],
    eta: float | None = None,
) -> MomentCurve:
    """Moment growth along an increasing grid of time scales (all > 1).

    When ``eta`` is given (sparse models), the closed-form liminf target
    (p+1)/(p+1/eta) is attached for comparison.
    """
    times = np.asarray([float(T) for T in times])
    if times.ndim != 1 or times.size < 2:
        raise ValueError("need an increasing grid of at least two time scales")
    if np.any(np.diff(times) <= 0):
        raise ValueError("time grid must increase strictly")
    if times[0] <= 1.0:
        raise ValueError("time scales must exceed 1 (slopes divide by log T)")
    averages = abel_averages(seq, list(times))
    moments = np.array([moment(ta, p) for ta in averages])
    slopes = np.log(moments) / (p * np.log(times))
    logs = np.log(times)
    mid = 0.5 * (logs[0] + logs[-1])
    mask = logs >= mid
    theory = (p + 1.0) / (p + 1.0 / eta) if eta is not None else None
    return MomentCurve(
        p=p,
        times=times,
        moments=moments,
        slopes=slopes,
        window=(float(math.exp(mid)), float(times[-1])),
        beta_minus_proxy=float(np.min(slopes[mask])),
        beta_plus_proxy=float(np.max(slopes[mask])),
        theory_beta_minus=theory,
    )
