"""Pure numpy implementations of the hot kernels.

Each function mirrors one in ``_kernels.pyx`` and must return identical
results (bit-identical for the sampler, equal to rounding for the scans).
Subsets are encoded as bit masks over outcome indices; the scans visit only
masks with bit 0 set, ``mask = (k << 1) | 1`` for ``k < 2**(n-1)``, because
the objectives are invariant under complementation.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

_CHUNK = 4096

GOLDEN_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


def _masks(n: int, start: int, stop: int) -> np.ndarray:
    k = np.arange(start, stop, dtype=np.int64)
    return (k << 1) | 1


def _bits(masks: np.ndarray, n: int) -> np.ndarray:
    return ((masks[:, None] >> np.arange(n)) & 1).astype(np.float64)


def _chunked(total, fn, threads):
    bounds = [(s, min(s + _CHUNK, total)) for s in range(0, total, _CHUNK)]
    out = np.empty(total)
    if threads > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for (s, e), vals in zip(bounds, pool.map(lambda b: fn(*b), bounds)):
                out[s:e] = vals
    else:
        for s, e in bounds:
            out[s:e] = fn(s, e)
    return out


def povm_subset_norms(diffs: np.ndarray, threads: int = 1) -> np.ndarray:
    """Operator norm of ``sum_{i in mask} diffs[i]`` for every mask with bit 0 set.

    ``diffs`` has shape ``(n, d, d)`` and holds Hermitian matrices.
    """
    diffs = np.ascontiguousarray(diffs, dtype=np.complex128)
    n = diffs.shape[0]
    total = 1 << (n - 1)

    def block(s, e):
        bits = _bits(_masks(n, s, e), n)
        sums = np.einsum("mi,iab->mab", bits, diffs)
        w = np.linalg.eigvalsh(sums)
        return np.maximum(np.abs(w[:, 0]), np.abs(w[:, -1]))

    return _chunked(total, block, threads)


def principal_sigma_min(u: np.ndarray, threads: int = 1) -> np.ndarray:
    """Smallest singular value of the principal submatrix ``u[mask, mask]``
    for every mask with bit 0 set."""
    u = np.ascontiguousarray(u, dtype=np.complex128)
    n = u.shape[0]
    total = 1 << (n - 1)
    masks = _masks(n, 0, total)
    popcount = _bits(masks, n).sum(axis=1).astype(np.int64)
    out = np.empty(total)
    for k in range(1, n + 1):
        sel = np.nonzero(popcount == k)[0]
        if sel.size == 0:
            continue
        bits = _bits(masks[sel], n).astype(bool)
        idx = np.nonzero(bits)[1].reshape(sel.size, k)

        def block(s, e, idx=idx):
            sub = u[idx[s:e, :, None], idx[s:e, None, :]]
            return np.linalg.svd(sub, compute_uv=False)[:, -1]

        out[sel] = _chunked(sel.size, block, threads)
    return out


def splitmix64(seed: int, counters: np.ndarray) -> np.ndarray:
    """Output number ``counters`` (0-based) of SplitMix64 seeded with ``seed``."""
    state = np.uint64(seed % (1 << 64)) + (counters.astype(np.uint64) + np.uint64(1)) * GOLDEN_GAMMA
    z = state
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def uniforms(seed: int, counters: np.ndarray) -> np.ndarray:
    return (splitmix64(seed, counters) >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)


def simulate_transcript(cdfs: np.ndarray, guess_first: np.ndarray, trials: int, seed: int):
    """Sample ``trials`` rounds of the two-hypothesis protocol.

    ``cdfs[h]`` is the cumulative outcome distribution under hypothesis ``h``
    (0 = first measurement, 1 = second) and ``guess_first[h, i]`` the
    probability that the conditional test answers "first" after outcome
    ``i``. Trial ``t`` consumes SplitMix64 outputs ``3t, 3t+1, 3t+2``.
    Returns ``(hypothesis, outcome, guess)`` arrays.
    """
    cdfs = np.ascontiguousarray(cdfs, dtype=np.float64)
    guess_first = np.ascontiguousarray(guess_first, dtype=np.float64)
    n = cdfs.shape[1]
    t = np.arange(trials, dtype=np.uint64)
    u_h = uniforms(seed, 3 * t)
    u_o = uniforms(seed, 3 * t + 1)
    u_g = uniforms(seed, 3 * t + 2)
    hyp = (u_h >= 0.5).astype(np.int8)
    outcome = np.empty(trials, dtype=np.int32)
    for h in (0, 1):
        sel = hyp == h
        outcome[sel] = np.minimum(np.searchsorted(cdfs[h], u_o[sel], side="right"), n - 1)
    q = guess_first[hyp, outcome]
    guess = np.where(u_g < q, 0, 1).astype(np.int8)
    return hyp, outcome, guess
