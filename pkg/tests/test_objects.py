import numpy as np
import pytest
from hypothesis import given, strategies as st

from povm_duel import linalg as la
from povm_duel.errors import ShapeError, ToleranceError
from povm_duel.objects import (
    DensityMatrix,
    Povm,
    VonNeumannMeasurement,
    apply_measure_and_prepare,
    channel_property_checks,
    choi_of_measurement,
    choi_of_unitary,
    helstrom_state_bound,
    outcome_probabilities,
    purify,
    total_variation,
)

import oracles as O
from conftest import fourier


def test_density_matrix_validation():
    with pytest.raises(ToleranceError):
        DensityMatrix(np.diag([1.5, -0.5]))
    with pytest.raises(ToleranceError):
        DensityMatrix(np.eye(2))
    assert DensityMatrix(np.eye(3) / 3).rank() == 3


def test_povm_validation():
    with pytest.raises(ToleranceError):
        Povm((np.diag([1.0, 0.0]), np.diag([0.0, 0.5])))
    with pytest.raises(ToleranceError):
        VonNeumannMeasurement(np.array([[1, 1], [0, 1]]))


def test_born_rule_fourier():
    p = outcome_probabilities(VonNeumannMeasurement(fourier(4)), np.diag([1, 0, 0, 0]).astype(complex))
    assert np.allclose(p, 0.25)


def test_measure_and_prepare_output_is_diagonal(rng):
    u = O.haar(3, rng)
    rho = O.random_state(3, rng)
    out = apply_measure_and_prepare(VonNeumannMeasurement(u), rho).matrix
    assert np.allclose(out, np.diag(np.diagonal(out)))


@given(st.integers(1, 5), st.integers(0, 10_000))
def test_choi_matches_action_oracle(d, seed):
    u = O.haar(d, np.random.default_rng(seed))
    j = choi_of_measurement(VonNeumannMeasurement(u)).matrix
    assert np.allclose(j, O.choi_by_action(O.measure_prepare(u), d), atol=1e-12)
    flags = channel_property_checks(choi_of_measurement(VonNeumannMeasurement(u)))
    assert flags.hermiticity_preserving and flags.completely_positive and flags.trace_preserving


def test_choi_of_unitary_matches_action(rng):
    u = O.haar(3, rng)
    assert np.allclose(choi_of_unitary(u).matrix, O.choi_by_action(lambda x: u @ x @ u.conj().T, 3))


def test_choi_difference_is_not_cp(rng):
    u = O.haar(3, rng)
    diff = choi_of_measurement(VonNeumannMeasurement(u)) - choi_of_measurement(VonNeumannMeasurement(np.eye(3)))
    flags = channel_property_checks(diff)
    assert not flags.completely_positive
    with pytest.raises(ShapeError):
        choi_of_measurement(VonNeumannMeasurement(u)) - choi_of_measurement(VonNeumannMeasurement(np.eye(2)))


def test_total_variation_and_helstrom():
    assert total_variation([1, 0], [0, 1]) == 2.0
    assert helstrom_state_bound(np.diag([1.0, 0]), np.diag([0, 1.0])) == 1.0
    with pytest.raises(ShapeError):
        total_variation([1, 0], [1, 0, 0])


@given(st.integers(1, 6), st.integers(1, 6), st.integers(0, 10_000))
def test_purification_rank(d, r, seed):
    r = min(r, d)
    rho = O.random_state(d, np.random.default_rng(seed), rank=r)
    p = purify(rho)
    assert p.schmidt_rank == r
    assert p.dims == (d, r)
    assert np.allclose(p.reduced_first(), rho, atol=1e-10)
    assert abs(np.linalg.norm(p.vector) - 1) < 1e-12
