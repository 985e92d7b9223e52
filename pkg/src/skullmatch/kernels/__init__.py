"""Occupancy kernel backend selection.

The compiled extension (_native, Cython) is preferred; the numpy fallback
(_numpy) is used when the extension was not built. Both expose the same
three functions with bit-identical results, so the choice only affects
speed. Set SKULLMATCH_BACKEND=numpy or =native to force one (forcing
native when it is not built raises ImportError rather than silently
falling back).

benchmarks/kernel_benchmark.py times the two backends side by side.
"""

from __future__ import annotations

import os
from types import ModuleType

from . import _numpy


def _load_native() -> ModuleType:
    from . import _native  # noqa: PLC0415  (deferred: extension may not exist)

    return _native


def available_backends() -> dict[str, ModuleType]:
    """Importable backends keyed by name."""
    out: dict[str, ModuleType] = {}
    try:
        out["native"] = _load_native()
    except ImportError:
        pass
    out["numpy"] = _numpy
    return out


def _select() -> ModuleType:
    forced = os.environ.get("SKULLMATCH_BACKEND")
    if forced:
        if forced == "numpy":
            return _numpy
        if forced == "native":
            return _load_native()
        raise ValueError(f"SKULLMATCH_BACKEND must be 'native' or 'numpy', got {forced!r}")
    try:
        return _load_native()
    except ImportError:
        return _numpy


_impl = _select()

BACKEND = _impl.NAME
fill_occupancy = _impl.fill_occupancy
popcount_words = _impl.popcount_words
intersect_count = _impl.intersect_count
