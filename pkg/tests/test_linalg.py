import numpy as np
import pytest
from hypothesis import given, strategies as st

from povm_duel import linalg as la
from povm_duel.errors import ShapeError, ToleranceError

import oracles as O


def test_as_square_rejects_rectangular():
    with pytest.raises(ShapeError):
        la.as_square(np.zeros((2, 3)))


def test_hermitize_rejects_non_hermitian():
    with pytest.raises(ToleranceError):
        la.hermitize(np.array([[0, 1], [0, 0]]))


def test_trace_norm_of_difference_of_projectors():
    a = np.diag([1.0, 0.0])
    b = np.full((2, 2), 0.5)
    # eigenvalues +-1/sqrt(2)
    assert la.trace_norm(a - b) == pytest.approx(np.sqrt(2), abs=1e-14)
    assert la.operator_norm(a - b) == pytest.approx(1 / np.sqrt(2), abs=1e-14)


def test_partial_traces(rng):
    a = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    b = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    k = np.kron(a, b)
    assert np.allclose(la.partial_trace_first(k, (2, 3)), np.trace(a) * b)
    assert np.allclose(la.partial_trace_second(k, (2, 3)), np.trace(b) * a)


@given(st.integers(0, 10_000))
def test_vectorize_identity(seed):
    rng = np.random.default_rng(seed)
    a, x, b = (rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)) for _ in range(3))
    # row-major: (A (x) B)|X>> = |A X B^T>>
    assert np.allclose(np.kron(a, b) @ la.vectorize(x), la.vectorize(a @ x @ b.T))
    assert np.allclose(la.unvectorize(la.vectorize(x), (3, 3)), x)


@given(st.integers(1, 6), st.integers(0, 10_000))
def test_haar_unitary_is_unitary(d, seed):
    u = la.haar_unitary(d, np.random.default_rng(seed))
    assert la.is_unitary(u, 1e-12)


@given(st.integers(1, 6), st.integers(0, 10_000))
def test_sqrt_psd(d, seed):
    rho = O.random_state(d, np.random.default_rng(seed))
    r = la.matrix_sqrt_psd(rho)
    assert np.allclose(r @ r, rho, atol=1e-12)
    assert la.is_hermitian(r)


def test_random_density_matrix_rank(rng):
    rho = la.random_density_matrix(5, rank=2, rng=rng)
    assert np.sum(np.linalg.eigvalsh(rho) > 1e-10) == 2
    assert abs(np.trace(rho) - 1) < 1e-12


def test_hermitian_eig_reconstructs(rng):
    m = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    m = m + m.conj().T
    es = la.hermitian_eig(m)
    assert np.allclose(es.reconstruct(), m)
    assert np.all(np.diff(es.eigenvalues) >= 0)


def test_svd_values_sorted(rng):
    s = la.svd_values(rng.standard_normal((4, 4)))
    assert np.all(np.diff(s) <= 0)
