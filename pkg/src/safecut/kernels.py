"""Simplex kernel selection: compiled extension with pure-NumPy fallback.

The compiled kernel (``_simplex_cy``) and the NumPy kernel (``_simplex_py``)
implement the same contract and produce bitwise-identical pivot sequences;
selection is a pure speed decision.  Set SAFECUT_KERNEL=py or =ext to force
one (``ext`` raises at import if the extension is unavailable).
"""

from __future__ import annotations

import os

from . import _simplex_py

OPTIMAL = _simplex_py.OPTIMAL
REACHED_STOP = _simplex_py.REACHED_STOP
UNBOUNDED = _simplex_py.UNBOUNDED
TINY_PIVOT = _simplex_py.TINY_PIVOT
ITER_LIMIT = _simplex_py.ITER_LIMIT

try:
    from . import _simplex_cy
except ImportError:
    _simplex_cy = None


def available_kernels() -> dict:
    """Name -> run_phase callable for every kernel usable in this build."""
    kernels = {"py": _simplex_py.run_phase}
    if _simplex_cy is not None:
        kernels["ext"] = _simplex_cy.run_phase
    return kernels


def _select() -> tuple:
    forced = os.environ.get("SAFECUT_KERNEL", "").strip().lower()
    if forced == "py":
        return "py", _simplex_py.run_phase
    if forced == "ext":
        if _simplex_cy is None:
            raise ImportError(
                "SAFECUT_KERNEL=ext but the compiled kernel is not built; "
                "reinstall the package or unset SAFECUT_KERNEL"
            )
        return "ext", _simplex_cy.run_phase
    if forced:
        raise ValueError(f"SAFECUT_KERNEL must be 'py' or 'ext', got {forced!r}")
    if _simplex_cy is not None:
        return "ext", _simplex_cy.run_phase
    return "py", _simplex_py.run_phase


KERNEL_NAME, run_phase = _select()
