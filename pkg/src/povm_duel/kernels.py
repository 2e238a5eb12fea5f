"""Backend selection for the hot loops.

The compiled extension ``povm_duel._kernels`` is used when it imports;
otherwise the numpy fallback in ``povm_duel._fallback`` is used. Setting
``POVM_DUEL_BACKEND=python`` forces the fallback. ``POVM_DUEL_THREADS`` sets
the default worker count for the subset scans.
"""
from __future__ import annotations

import os

import numpy as np

from . import _fallback

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

COMPILED_AVAILABLE = _compiled is not None


def _select(name: str | None):
    name = (name or os.environ.get("POVM_DUEL_BACKEND", "")).strip().lower()
    if name in ("python", "fallback", "numpy"):
        return _fallback
    if name in ("compiled", "cython"):
        if _compiled is None:
            raise ImportError("compiled backend requested but povm_duel._kernels is not built")
        return _compiled
    return _compiled if _compiled is not None else _fallback


BACKEND = "compiled" if _select(None) is _compiled and _compiled is not None else "python"


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get("POVM_DUEL_THREADS", "1")))
    except ValueError:
        return 1


def povm_subset_norms(diffs, threads=None, backend=None) -> np.ndarray:
    mod = _select(backend)
    diffs = np.ascontiguousarray(diffs, dtype=np.complex128)
    return np.asarray(mod.povm_subset_norms(diffs, threads or default_threads()))


def principal_sigma_min(u, threads=None, backend=None) -> np.ndarray:
    mod = _select(backend)
    u = np.ascontiguousarray(u, dtype=np.complex128)
    return np.asarray(mod.principal_sigma_min(u, threads or default_threads()))


def simulate_transcript(cdfs, guess_first, trials: int, seed: int, backend=None):
    mod = _select(backend)
    cdfs = np.ascontiguousarray(cdfs, dtype=np.float64)
    guess_first = np.ascontiguousarray(guess_first, dtype=np.float64)
    return mod.simulate_transcript(cdfs, guess_first, int(trials), int(seed) % (1 << 64))
