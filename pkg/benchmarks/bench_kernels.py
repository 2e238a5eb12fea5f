"""Compiled vs numpy kernels.

    python benchmarks/bench_kernels.py [--repeat N]

Times the principal-submatrix scan, the POVM subset scan and the transcript
sampler on both backends and checks that their outputs agree.
"""
import argparse
import timeit

import numpy as np

from povm_duel import kernels
from povm_duel.linalg import haar_unitary


def _cases(rng):
    for d in (8, 12, 14):
        u = haar_unitary(d, rng)
        yield f"principal_sigma_min d={d}", lambda b, u=u, t=None: kernels.principal_sigma_min(u, t, backend=b)
    for n, d in ((10, 3), (14, 3), (16, 4)):
        a = rng.standard_normal((n, d, d)) + 1j * rng.standard_normal((n, d, d))
        diffs = a + a.conj().transpose(0, 2, 1)
        yield f"povm_subset_norms n={n} d={d}", lambda b, x=diffs, t=None: kernels.povm_subset_norms(x, t, backend=b)
    probs = rng.random((2, 6))
    cdfs = np.cumsum(probs, axis=1) / probs.sum(axis=1, keepdims=True)
    guess = rng.random((2, 6))
    yield "simulate_transcript 1e6", lambda b, t=None: kernels.simulate_transcript(cdfs, guess, 1_000_000, 7, backend=b)


def _same(a, b):
    if isinstance(a, tuple):
        return all(np.array_equal(np.asarray(x), np.asarray(y)) for x, y in zip(a, b))
    return np.allclose(a, b, rtol=1e-10, atol=1e-12)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if not kernels.COMPILED_AVAILABLE:
        print("compiled kernels not built; only the numpy backend is available")
    rng = np.random.default_rng(0)
    print(f"{'case':36s} {'python s':>10s} {'compiled s':>11s} {'speedup':>8s}  agree")
    for name, fn in _cases(rng):
        t_py = min(timeit.repeat(lambda: fn("python"), number=1, repeat=args.repeat))
        if kernels.COMPILED_AVAILABLE:
            t_c = min(timeit.repeat(lambda: fn("compiled"), number=1, repeat=args.repeat))
            agree = _same(fn("python"), fn("compiled"))
            print(f"{name:36s} {t_py:10.4f} {t_c:11.4f} {t_py / t_c:8.1f}  {agree}")
        else:
            print(f"{name:36s} {t_py:10.4f} {'-':>11s} {'-':>8s}  -")


if __name__ == "__main__":
    main()
