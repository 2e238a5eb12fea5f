import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from povm_duel import kernels
from povm_duel.entangled import diamond_distance
from povm_duel.errors import ShapeError
from povm_duel.linalg import haar_unitary
from povm_duel.protocol import build_protocol, simulate
from povm_duel.special import fourier_discriminator, fourier_matrix

import oracles as O

BACKENDS = ["python"] + (["compiled"] if kernels.COMPILED_AVAILABLE else [])


def test_identical_measurements_give_half():
    u = O.haar(3, np.random.default_rng(1))
    p = build_protocol(u, u)
    assert p.theoretical_success == pytest.approx(0.5, abs=1e-12)
    run = simulate(p, 20_000, seed=3)
    assert run.within_three_sigma


def test_f2_statistics():
    rep = diamond_distance(fourier_matrix(2))
    p = build_protocol(rep.reduced_unitary, discriminator=rep.discriminator)
    assert p.theoretical_success == pytest.approx(O.HADAMARD_SUCCESS, abs=1e-9)
    run = simulate(p, 100_000, seed=0)
    assert abs(run.empirical_success - O.HADAMARD_SUCCESS) <= 3 * run.standard_error


def test_f4_perfect():
    p = build_protocol(fourier_matrix(4), discriminator=fourier_discriminator(4))
    assert p.theoretical_success == pytest.approx(1.0, abs=1e-12)
    assert simulate(p, 10_000, seed=5).empirical_success == 1.0


def test_ancilla_dimension_is_rank():
    x = fourier_discriminator(6)
    assert build_protocol(fourier_matrix(6), discriminator=x).ancilla_dimension == 2


def test_success_matches_report(rng):
    u, v = O.haar(3, rng), O.haar(3, rng)
    rep = diamond_distance(u, v)
    p = build_protocol(u, v, discriminator=rep.discriminator)
    assert p.theoretical_success == pytest.approx(rep.success_probability, abs=1e-8)


def test_purification_reduces_to_program_state(rng):
    u = O.haar(4, rng)
    rep = diamond_distance(u)
    p = build_protocol(u, discriminator=rep.discriminator)
    m = p.input_state
    assert np.allclose(m @ m.conj().T, rep.program_state, atol=1e-10)
    assert np.allclose(p.outcome_probabilities.sum(axis=1), 1.0, atol=1e-12)


def test_tests_are_projectors(rng):
    u, v = O.haar(3, rng), O.haar(3, rng)
    p = build_protocol(u, v, discriminator=O.random_state(3, rng))
    for t in p.tests:
        assert np.allclose(t @ t, t, atol=1e-10)
        assert np.allclose(t, t.conj().T, atol=1e-12)


@pytest.mark.parametrize("backend", BACKENDS)
def test_reproducible(backend):
    p = build_protocol(fourier_matrix(3))
    a = simulate(p, 5000, seed=11, backend=backend)
    b = simulate(p, 5000, seed=11, backend=backend)
    assert a.transcript_bytes() == b.transcript_bytes()
    c = simulate(p, 5000, seed=12, backend=backend)
    assert a.transcript_bytes() != c.transcript_bytes()


def test_backends_agree():
    if not kernels.COMPILED_AVAILABLE:
        pytest.skip("compiled kernels not built")
    p = build_protocol(fourier_matrix(3))
    a = simulate(p, 3000, seed=2, backend="python")
    b = simulate(p, 3000, seed=2, backend="compiled")
    assert a.transcript_bytes() == b.transcript_bytes()


def test_prefix_stability():
    p = build_protocol(fourier_matrix(3))
    a = simulate(p, 1000, seed=4)
    b = simulate(p, 400, seed=4)
    assert np.array_equal(a.hypotheses[:400], b.hypotheses)
    assert np.array_equal(a.outcomes[:400], b.outcomes)


def test_outcome_frequencies_follow_born_rule():
    rep = diamond_distance(fourier_matrix(3))
    p = build_protocol(fourier_matrix(3), discriminator=rep.discriminator)
    n = 60_000
    run = simulate(p, n, seed=9)
    for h in range(2):
        sel = run.hypotheses == h
        m = sel.sum()
        assert abs(m / n - 0.5) <= 4 * np.sqrt(0.25 / n)
        counts = np.bincount(run.outcomes[sel], minlength=3) / m
        probs = p.outcome_probabilities[h]
        assert np.all(np.abs(counts - probs) <= 4 * np.sqrt(probs * (1 - probs) / m) + 1e-12)


@settings(max_examples=15)
@given(seed=st.integers(0, 10_000), d=st.integers(2, 4))
def test_empirical_not_above_theory(seed, d):
    rng = np.random.default_rng(seed)
    u, v = haar_unitary(d, rng), haar_unitary(d, rng)
    p = build_protocol(u, v, discriminator=O.random_state(d, rng))
    # one-sided 3 sigma has a ~0.13% false-alarm rate per instance
    run = simulate(p, 4000, seed=0)
    assert run.empirical_success <= run.theoretical_success + 3 * run.standard_error + 1e-12


def test_input_validation():
    with pytest.raises(ShapeError):
        build_protocol(np.eye(2), np.eye(3))
    with pytest.raises(ShapeError):
        build_protocol(np.eye(2), discriminator=np.eye(3) / 3)
    with pytest.raises(ValueError):
        simulate(build_protocol(np.eye(2)), 0, seed=0)
