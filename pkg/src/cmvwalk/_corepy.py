"""Pure-numpy kernels: the fallback backend.

Semantics (block layout, sweep order, accumulation formulas) match the
compiled backend in ``_core.pyx`` operation for operation. Real-arithmetic
kernels agree bitwise; the complex sweeps agree to a few ulps per step
(numpy's SIMD complex multiply contracts with FMA, the compiled kernel
does not), so either backend can serve the rest of the package.

Layout conventions shared by every kernel:

* ``a``/``r`` are the coefficient window: ``a[n]`` complex, ``r[n]`` real.
* The direct-sum factor with blocks at even offsets pairs sites
  ``(0, 1), (2, 3), ...``; the factor with blocks at odd offsets pairs
  ``(1, 2), (3, 4), ...`` and leaves site 0 alone.
* ``f`` is the frontier: every amplitude beyond index ``f`` is exactly zero
  and is never read or written, which keeps light-cone zeros exact.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def _block_sweep(a, r, v, jlast, start):
    """Apply 2x2 blocks [[conj(a), r], [r, -a]] at (j, j+1), j = start..jlast step 2."""
    if jlast < start:
        return
    lo = slice(start, jlast + 1, 2)
    hi = slice(start + 1, jlast + 2, 2)
    x = v[lo].copy()
    y = v[hi].copy()
    aj = a[lo]
    rj = r[lo]
    v[lo] = np.conj(aj) * x + rj * y
    v[hi] = rj * x - aj * y


def _block_sweep_adjoint(a, r, v, jlast, start):
    """Apply 2x2 blocks [[a, r], [r, -conj(a)]] at (j, j+1), j = start..jlast step 2."""
    if jlast < start:
        return
    lo = slice(start, jlast + 1, 2)
    hi = slice(start + 1, jlast + 2, 2)
    x = v[lo].copy()
    y = v[hi].copy()
    aj = a[lo]
    rj = r[lo]
    v[lo] = aj * x + rj * y
    v[hi] = rj * x - np.conj(aj) * y


def lm_apply(a, r, v, f):
    """In-place v <- L(M v) within frontier ``f``; returns the new frontier.

    Requires f + 2 < len(v).
    """
    _block_sweep(a, r, v, f if f % 2 == 1 else f - 1, 1)
    if f % 2 == 1:
        f += 1
    _block_sweep(a, r, v, f if f % 2 == 0 else f - 1, 0)
    if f % 2 == 0:
        f += 1
    return f


def lm_apply_adjoint(a, r, v, f):
    """In-place v <- M*(L* v) within frontier ``f``; returns the new frontier."""
    _block_sweep_adjoint(a, r, v, f if f % 2 == 0 else f - 1, 0)
    if f % 2 == 0:
        f += 1
    _block_sweep_adjoint(a, r, v, f if f % 2 == 1 else f - 1, 1)
    if f % 2 == 1:
        f += 1
    return f


def probabilities_into(out, v, f):
    """out[0:f+1] = |v[0:f+1]|^2 (entries beyond f are left untouched)."""
    x = v[: f + 1]
    out[: f + 1] = x.real * x.real + x.imag * x.imag


def abel_accumulate(acc, comp, v, f, w):
    """Kahan-compensated acc[i] += w*|v[i]|^2 for i <= f; comp carries the error."""
    x = v[: f + 1]
    p = w * (x.real * x.real + x.imag * x.imag)
    y = p - comp[: f + 1]
    t = acc[: f + 1] + y
    comp[: f + 1] = (t - acc[: f + 1]) - y
    acc[: f + 1] = t
