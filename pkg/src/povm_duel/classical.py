"""Entanglement-free discrimination of measurements.

Without an ancilla the best strategy feeds a single pure state and compares
outcome distributions, so the success probability is

    1/2 + 1/2 * max_Delta || sum_{i in Delta} (S_i - T_i) ||,

maximised over all outcome subsets. For a pair of von Neumann measurements
``(P_U, P_1)`` the inner norm equals ``sqrt(1 - sigma_min(U_Delta)^2)`` where
``U_Delta`` is the principal submatrix on ``Delta``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from . import linalg as la
from .errors import ShapeError, SubsetCapError
from .objects import Povm, VonNeumannMeasurement

SUBSET_CAP = 20
TIE_TOL = 1e-12
RANK_DEFICIENCY_TOL = 1e-9


@dataclass(frozen=True)
class SubsetScanResult:
    best_subset: tuple
    best_value: float
    optimal_state: np.ndarray
    probability_bound: float


def _unitary_of(u) -> np.ndarray:
    if isinstance(u, VonNeumannMeasurement):
        return u.unitary
    return VonNeumannMeasurement(u).unitary


def _effects(m) -> np.ndarray:
    if isinstance(m, VonNeumannMeasurement):
        return m.effects()
    if isinstance(m, Povm):
        return m.stacked()
    return Povm(tuple(m)).stacked()


def _check_cap(n, subset_cap):
    if n > subset_cap:
        raise SubsetCapError(f"exhaustive scan over 2^{n} subsets exceeds subset_cap={subset_cap}")


def _mask_to_subset(mask: int, n: int) -> tuple:
    return tuple(i for i in range(n) if (mask >> i) & 1)


def _pick_subset(values: np.ndarray, n: int, target: float, maximize: bool) -> tuple:
    """Deterministic choice among tied scan entries.

    Entry ``k`` stands for the mask ``(k << 1) | 1`` and, by complement
    symmetry, for its complement too. Ties are values within ``TIE_TOL`` of
    ``target``; the smallest subset wins, then the lexicographically smallest.
    """
    if maximize:
        tied = np.nonzero(values >= target - TIE_TOL)[0]
    else:
        tied = np.nonzero(values <= target + TIE_TOL)[0]
    full = (1 << n) - 1
    candidates = []
    for k in tied:
        mask = (int(k) << 1) | 1
        candidates.append(_mask_to_subset(mask, n))
        if mask != full:
            candidates.append(_mask_to_subset(full ^ mask, n))
    return min(candidates, key=lambda s: (len(s), s))


def _leading_abs_eigvec(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(0.5 * (m + la.dagger(m)))
    # eigh sorts ascending, so the extreme |w| sits at an end; ties go to the positive side
    j = w.size - 1 if w[-1] >= -w[0] - TIE_TOL else 0
    vec = v[:, j]
    # fix the global phase so the first non-negligible entry is real positive
    nz = np.nonzero(np.abs(vec) > 1e-12)[0]
    if nz.size:
        vec = vec * np.exp(-1j * np.angle(vec[nz[0]]))
    return vec / np.linalg.norm(vec)


def classical_objective(s, t, psi) -> float:
    """``sum_i |<psi|(S_i - T_i)|psi>|`` for a pure input state."""
    diffs = _effects(s) - _effects(t)
    psi = np.asarray(psi, dtype=np.complex128).reshape(-1)
    return float(np.abs(np.einsum("a,iab,b->i", psi.conj(), diffs, psi)).sum())


def classical_bound_povm(s, t, subset_cap=SUBSET_CAP, threads=None, backend=None) -> SubsetScanResult:
    """Exhaustive subset scan of the entanglement-free bound for two POVMs."""
    es = _effects(s)
    et = _effects(t)
    if es.shape != et.shape:
        raise ShapeError(f"POVMs differ in shape: {es.shape} vs {et.shape}")
    n = es.shape[0]
    _check_cap(n, subset_cap)
    diffs = es - et
    values = kernels.povm_subset_norms(diffs, threads=threads, backend=backend)
    best = float(values.max())
    subset = _pick_subset(values, n, best, maximize=True)

    m = diffs[list(subset)].sum(axis=0)
    check = la.operator_norm(m)
    comp = [i for i in range(n) if i not in subset]
    if comp:
        assert abs(la.operator_norm(diffs[comp].sum(axis=0)) - check) <= 1e-10
    assert abs(check - best) <= 1e-10, (check, best)

    psi = _leading_abs_eigvec(m)
    return SubsetScanResult(subset, check, psi, 0.5 + 0.5 * check)


def _principal_scan(w, subset_cap, threads, backend):
    n = w.shape[0]
    _check_cap(n, subset_cap)
    sig = kernels.principal_sigma_min(w, threads=threads, backend=backend)
    smin = float(sig.min())
    subset = _pick_subset(sig, n, smin, maximize=False)
    return subset, la.svd_values(w[np.ix_(subset, subset)])[-1]


def classical_bound_projective(u, v=None, subset_cap=SUBSET_CAP, threads=None, backend=None) -> SubsetScanResult:
    """Entanglement-free bound for ``(P_U, P_V)`` via principal submatrices of ``V^dagger U``.

    ``best_value`` is ``sqrt(1 - min sigma_min(W_Delta)^2)``; the reported
    subset is the minimising ``Delta``.
    """
    uu = _unitary_of(u)
    vv = np.eye(uu.shape[0], dtype=np.complex128) if v is None else _unitary_of(v)
    if uu.shape != vv.shape:
        raise ShapeError(f"measurements act on dimensions {uu.shape[0]} and {vv.shape[0]}")
    w = la.dagger(vv) @ uu
    n = w.shape[0]
    subset, smin = _principal_scan(w, subset_cap, threads, backend)
    value = float(np.sqrt(max(0.0, 1.0 - smin * smin)))

    idx = list(subset)
    m = np.zeros((n, n), dtype=np.complex128)
    m[idx, idx] = 1.0
    m -= w[:, idx] @ la.dagger(w[:, idx])
    psi_w = _leading_abs_eigvec(m)
    return SubsetScanResult(subset, value, vv @ psi_w, 0.5 + 0.5 * value)


def has_rank_deficient_principal_submatrix(u, subset_cap=SUBSET_CAP, tol=RANK_DEFICIENCY_TOL,
                                           threads=None, backend=None):
    """Return ``(True, Delta)`` when some ``U_Delta`` has ``sigma_min <= tol``,
    else ``(False, None)``. True exactly when ``P_U`` and ``P_1`` can be told
    apart perfectly without entanglement."""
    w = _unitary_of(u)
    subset, smin = _principal_scan(w, subset_cap, threads, backend)
    if smin <= tol:
        return True, subset
    return False, None


def min_principal_sigma(u, subset_cap=SUBSET_CAP, threads=None, backend=None) -> float:
    w = _unitary_of(u)
    return float(_principal_scan(w, subset_cap, threads, backend)[1])


def optimal_classical_state(s, t, subset_cap=SUBSET_CAP, threads=None, backend=None) -> np.ndarray:
    return classical_bound_povm(s, t, subset_cap, threads, backend).optimal_state
