"""Kernel backend selection.

Prefers the compiled extension, falls back to the numpy implementation.
Set ``CMVWALK_BACKEND=python`` or ``CMVWALK_BACKEND=c`` to force a choice
(forcing ``c`` raises if the extension is unavailable).
"""

from __future__ import annotations

import os

from . import _corepy

_forced = os.environ.get("CMVWALK_BACKEND", "").strip().lower()

if _forced == "python":
    kernel = _corepy
else:
    try:
        from . import _core as kernel  # type: ignore[no-redef]
    except ImportError:
        if _forced == "c":
            raise ImportError(
                "CMVWALK_BACKEND=c requested but the compiled kernel is not built"
            ) from None
        kernel = _corepy

BACKEND = "c" if kernel is not _corepy else "python"

lm_apply = kernel.lm_apply
lm_apply_adjoint = kernel.lm_apply_adjoint
probabilities_into = kernel.probabilities_into
abel_accumulate = kernel.abel_accumulate
