# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the kernels in ``_fallback.py`` (same contracts)."""
import numpy as np

from cython.parallel cimport parallel, prange
from libc.math cimport fabs
from libc.stdint cimport int64_t, uint64_t
from libc.stdlib cimport free, malloc
from scipy.linalg.cython_lapack cimport zgesvd, zheev


cdef inline double _herm_norm(double complex *a, int n, double *w,
                              double complex *work, int lwork, double *rwork) noexcept nogil:
    cdef char jobz = b'N'
    cdef char uplo = b'L'
    cdef int info = 0
    zheev(&jobz, &uplo, &n, a, &n, w, work, &lwork, rwork, &info)
    if info != 0:
        return -1.0
    if fabs(w[0]) > fabs(w[n - 1]):
        return fabs(w[0])
    return fabs(w[n - 1])


def povm_subset_norms(const double complex[:, :, ::1] diffs, int threads=1):
    cdef int n = diffs.shape[0]
    cdef int d = diffs.shape[1]
    cdef int64_t total = (<int64_t>1) << (n - 1)
    cdef double[::1] out = np.empty(total)
    cdef int lwork = 65 * d
    cdef int64_t k, mask
    cdef int i, a, b
    cdef double complex *buf
    cdef double complex *work
    cdef double *w
    cdef double *rwork
    with nogil, parallel(num_threads=threads):
        buf = <double complex *> malloc(d * d * sizeof(double complex))
        work = <double complex *> malloc(lwork * sizeof(double complex))
        w = <double *> malloc(d * sizeof(double))
        rwork = <double *> malloc((3 * d + 1) * sizeof(double))
        for k in prange(total, schedule='static'):
            mask = (k << 1) | 1
            for a in range(d * d):
                buf[a] = 0
            for i in range(n):
                if (mask >> i) & 1:
                    for a in range(d):
                        for b in range(d):
                            buf[a * d + b] = buf[a * d + b] + diffs[i, a, b]
            out[k] = _herm_norm(buf, d, w, work, lwork, rwork)
        free(buf)
        free(work)
        free(w)
        free(rwork)
    return np.asarray(out)


def principal_sigma_min(const double complex[:, ::1] u, int threads=1):
    cdef int n = u.shape[0]
    cdef int64_t total = (<int64_t>1) << (n - 1)
    cdef double[::1] out = np.empty(total)
    cdef int lwork = 65 * n + 64
    cdef int64_t k, mask
    cdef int i, j, m, r, c, info, one = 1
    cdef char jobn = b'N'
    cdef int *idx
    cdef double complex *buf
    cdef double complex *work
    cdef double complex dummy
    cdef double *s
    cdef double *rwork
    with nogil, parallel(num_threads=threads):
        idx = <int *> malloc(n * sizeof(int))
        buf = <double complex *> malloc(n * n * sizeof(double complex))
        work = <double complex *> malloc(lwork * sizeof(double complex))
        s = <double *> malloc(n * sizeof(double))
        rwork = <double *> malloc((5 * n + 1) * sizeof(double))
        for k in prange(total, schedule='static'):
            mask = (k << 1) | 1
            m = 0
            for i in range(n):
                if (mask >> i) & 1:
                    idx[m] = i
                    m = m + 1
            for r in range(m):
                for c in range(m):
                    buf[r * m + c] = u[idx[r], idx[c]]
            info = 0
            zgesvd(&jobn, &jobn, &m, &m, buf, &m, s, &dummy, &one, &dummy, &one,
                   work, &lwork, rwork, &info)
            if info == 0:
                out[k] = s[m - 1]
            else:
                out[k] = -1.0
        free(idx)
        free(buf)
        free(work)
        free(s)
        free(rwork)
    return np.asarray(out)


cdef inline uint64_t _splitmix(uint64_t seed, uint64_t counter) noexcept nogil:
    cdef uint64_t z = seed + (counter + 1) * <uint64_t>0x9E3779B97F4A7C15ULL
    z = (z ^ (z >> 30)) * <uint64_t>0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * <uint64_t>0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline double _uniform(uint64_t seed, uint64_t counter) noexcept nogil:
    return <double>(_splitmix(seed, counter) >> 11) * (1.0 / 9007199254740992.0)


def simulate_transcript(const double[:, ::1] cdfs, const double[:, ::1] guess_first,
                        int64_t trials, uint64_t s):
    cdef int n = cdfs.shape[1]
    hyp_arr = np.empty(trials, dtype=np.int8)
    out_arr = np.empty(trials, dtype=np.int32)
    guess_arr = np.empty(trials, dtype=np.int8)
    cdef signed char[::1] hyp = hyp_arr
    cdef int[::1] outcome = out_arr
    cdef signed char[::1] guess = guess_arr
    cdef int64_t t
    cdef int h, lo, hi, mid
    cdef double u
    with nogil:
        for t in range(trials):
            h = 1 if _uniform(s, 3 * <uint64_t>t) >= 0.5 else 0
            u = _uniform(s, 3 * <uint64_t>t + 1)
            lo = 0
            hi = n
            while lo < hi:
                mid = (lo + hi) >> 1
                if cdfs[h, mid] <= u:
                    lo = mid + 1
                else:
                    hi = mid
            if lo > n - 1:
                lo = n - 1
            hyp[t] = h
            outcome[t] = lo
            guess[t] = 0 if _uniform(s, 3 * <uint64_t>t + 2) < guess_first[h, lo] else 1
    return hyp_arr, out_arr, guess_arr
