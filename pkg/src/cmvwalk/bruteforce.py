"""Dense reference routes used by the shipped verification suites.

Everything here deliberately avoids the factored/banded code paths: the
operator window is assembled entry by entry from the explicit pentadiagonal
pattern, evolution is repeated dense matrix-vector product, and resolvents
come from a dense solve.  The test suite carries its own, separately
written copy of these formulas; this module is the package's own second
route for `cmvwalk verify`.
"""

from __future__ import annotations

import numpy as np

from .cmv import VerblunskySequence

__all__ = ["dense_window", "dense_evolution", "dense_resolvent_window"]


def dense_window(seq: VerblunskySequence, size: int) -> np.ndarray:
    """Entrywise pentadiagonal window (boundary convention alpha_{-1} = -1)."""
    alphas, rhos = seq.window(size + 2)

    def a(i):
        return -1.0 if i == -1 else alphas[i]

    def r(i):
        return 1.0 if i == -1 else rhos[i]

    C = np.zeros((size, size), dtype=np.complex128)

    def put(i, j, value):
        if 0 <= j < size:
            C[i, j] = value

    for i in range(size):
        if i % 2 == 0:
            put(i, i - 1, np.conj(a(i)) * r(i - 1))
            put(i, i, -np.conj(a(i)) * a(i - 1))
            put(i, i + 1, np.conj(a(i + 1)) * r(i))
            put(i, i + 2, r(i + 1) * r(i))
        else:
            put(i, i - 2, r(i - 1) * r(i - 2))
            put(i, i - 1, -r(i - 1) * a(i - 2))
            put(i, i, -np.conj(a(i)) * a(i - 1))
            put(i, i + 1, -r(i) * a(i - 1))
    return C


def dense_evolution(seq: VerblunskySequence, t_max: int) -> np.ndarray:
    """States for t = 0..t_max by repeated dense products on a safe window."""
    size = 2 * t_max + 4
    C = dense_window(seq, size)
    states = np.zeros((t_max + 1, size), dtype=np.complex128)
    states[0, 0] = 1.0
    for t in range(1, t_max + 1):
        states[t] = C @ states[t - 1]
    return states


def dense_resolvent_window(
    seq: VerblunskySequence, z: complex, size: int
) -> np.ndarray:
    """(C - z)^{-1} delta_0 on a window by dense solve."""
    A = dense_window(seq, size) - z * np.eye(size)
    b = np.zeros(size, dtype=np.complex128)
    b[0] = 1.0
    return np.linalg.solve(A, b)
