"""Kernel backend selection, decided once at import.

The compiled Cython extension is preferred; the pure numpy backend is the
fallback.  Set INTERFACE_LAB_BACKEND=pure|compiled|auto to force a choice
(``compiled`` raises if the extension is not built).  Both backends follow
the same stream-consumption contract and produce identical trajectories
from identical (master_seed, stream_id) streams.
"""

from __future__ import annotations

import os

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built; pure fallback stays available
    _compiled = None

_choice = os.environ.get("INTERFACE_LAB_BACKEND", "auto").strip().lower() or "auto"
if _choice not in ("auto", "compiled", "pure"):
    raise ValueError(
        f"INTERFACE_LAB_BACKEND must be auto, compiled, or pure, got {_choice!r}"
    )
if _choice == "compiled" and _compiled is None:
    raise ImportError(
        "INTERFACE_LAB_BACKEND=compiled but the interface_lab._kernels "
        "extension is not built; install with the Cython extension or use "
        "INTERFACE_LAB_BACKEND=pure"
    )

if _choice == "pure" or _compiled is None:
    _active = _kernels_py
    BACKEND = "pure"
else:
    _active = _compiled
    BACKEND = "compiled"

HAVE_COMPILED = _compiled is not None

simulate_path = _active.simulate_path
simulate_summaries = _active.simulate_summaries
simulate_fpt = _active.simulate_fpt


def backend_name() -> str:
    return BACKEND
