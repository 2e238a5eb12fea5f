"""Dense complex linear algebra primitives.

Matrices are plain ``numpy`` ``complex128`` arrays. Vectorisation is
row-major, so that ``vectorize(|i><j|)`` is the basis vector ``|i>|j>`` and
``(A kron B) vectorize(X) == vectorize(A X B^T)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import unitary_group

from .errors import ShapeError, ToleranceError

HERMITIAN_RTOL = 1e-8
PSD_CLIP = -1e-10


def as_matrix(a, name="matrix") -> np.ndarray:
    """Return ``a`` as a 2-D complex128 array, rejecting NaN/Inf entries."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ToleranceError(f"{name} contains non-finite entries")
    return m


def as_square(a, name="matrix") -> np.ndarray:
    m = as_matrix(a, name)
    if m.shape[0] != m.shape[1]:
        raise ShapeError(f"{name} must be square, got shape {m.shape}")
    return m


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def hs_inner(a, b) -> complex:
    """Hilbert-Schmidt inner product ``Tr(A^dagger B)`` (conjugate-linear in ``a``)."""
    a = np.asarray(a)
    b = np.asarray(b)
    return complex(np.vdot(a, b))


def is_hermitian(a, rtol=HERMITIAN_RTOL) -> bool:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return False
    scale = max(1.0, np.linalg.norm(a))
    return bool(np.linalg.norm(a - dagger(a)) <= rtol * scale)


def is_unitary(u, atol=1e-8) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return bool(np.linalg.norm(dagger(u) @ u - np.eye(u.shape[0])) <= atol)


def is_normal(a, atol=1e-8) -> bool:
    a = np.asarray(a)
    scale = max(1.0, np.linalg.norm(a) ** 2)
    return bool(np.linalg.norm(a @ dagger(a) - dagger(a) @ a) <= atol * scale)


@dataclass(frozen=True)
class HermitianEigenSystem:
    """Ascending eigenvalues with a unitary matrix of column eigenvectors."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ dagger(v)


def hermitize(a, name="matrix") -> np.ndarray:
    """Check Hermiticity within the relative tolerance and symmetrize."""
    a = as_square(a, name)
    scale = max(1.0, np.linalg.norm(a))
    err = np.linalg.norm(a - dagger(a))
    if err > HERMITIAN_RTOL * scale:
        raise ToleranceError(
            f"{name} is not Hermitian: ||A - A^dagger||_F = {err:.3e} "
            f"exceeds {HERMITIAN_RTOL:g} * {scale:.3e}"
        )
    return 0.5 * (a + dagger(a))


def hermitian_eig(a) -> HermitianEigenSystem:
    h = hermitize(a)
    w, v = np.linalg.eigh(h)
    return HermitianEigenSystem(w, v)


def svd_values(a) -> np.ndarray:
    """Singular values in descending order."""
    m = as_matrix(a)
    if m.size == 0:
        return np.zeros(0)
    return np.linalg.svd(m, compute_uv=False)


def trace_norm(a) -> float:
    m = as_square(a)
    return float(np.sum(svd_values(m)))


def operator_norm(a) -> float:
    m = as_matrix(a)
    if m.size == 0:
        return 0.0
    return float(svd_values(m)[0])


def partial_trace_first(a, dims) -> np.ndarray:
    """Trace out the first tensor factor of an operator on ``d1 (x) d2``."""
    d1, d2 = (int(x) for x in dims)
    m = as_square(a)
    if m.shape[0] != d1 * d2:
        raise ShapeError(f"size {m.shape[0]} does not factor as {d1} x {d2}")
    return np.einsum("ijik->jk", m.reshape(d1, d2, d1, d2))


def partial_trace_second(a, dims) -> np.ndarray:
    d1, d2 = (int(x) for x in dims)
    m = as_square(a)
    if m.shape[0] != d1 * d2:
        raise ShapeError(f"size {m.shape[0]} does not factor as {d1} x {d2}")
    return np.einsum("ijkj->ik", m.reshape(d1, d2, d1, d2))


def vectorize(x) -> np.ndarray:
    return np.asarray(x, dtype=np.complex128).reshape(-1)


def unvectorize(v, shape) -> np.ndarray:
    v = np.asarray(v, dtype=np.complex128)
    if v.size != shape[0] * shape[1]:
        raise ShapeError(f"cannot reshape vector of length {v.size} to {shape}")
    return v.reshape(shape)


def kron(a, b) -> np.ndarray:
    return np.kron(np.asarray(a, dtype=np.complex128), np.asarray(b, dtype=np.complex128))


def diag_extract(c) -> np.ndarray:
    return np.diagonal(as_square(c)).copy()


def diag_embed(v) -> np.ndarray:
    return np.diag(np.asarray(v, dtype=np.complex128).reshape(-1))


def matrix_sqrt_psd(a) -> np.ndarray:
    """Principal square root of a positive semidefinite matrix.

    Eigenvalues in ``[-1e-10, 0)`` are clipped to zero; anything more negative
    is rejected.
    """
    es = hermitian_eig(a)
    lam = es.eigenvalues
    if lam.size and lam[0] < PSD_CLIP:
        raise ToleranceError(f"matrix is not PSD: smallest eigenvalue {lam[0]:.3e}")
    root = np.sqrt(np.clip(lam, 0.0, None))
    v = es.eigenvectors
    return (v * root) @ dagger(v)


def haar_unitary(d: int, rng=None) -> np.ndarray:
    """Haar-distributed random unitary of size ``d``."""
    if d == 1:
        rng = np.random.default_rng(rng)
        return np.array([[np.exp(2j * np.pi * rng.random())]])
    return np.asarray(unitary_group.rvs(d, random_state=rng), dtype=np.complex128)


def random_density_matrix(d: int, rank=None, rng=None) -> np.ndarray:
    """Random state ``G G^dagger / Tr`` with complex Gaussian ``G`` of ``rank`` columns."""
    rng = np.random.default_rng(rng)
    k = d if rank is None else rank
    g = rng.standard_normal((d, k)) + 1j * rng.standard_normal((d, k))
    rho = g @ dagger(g)
    return rho / np.trace(rho).real
