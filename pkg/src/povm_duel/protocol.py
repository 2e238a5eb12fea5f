"""Monte-Carlo run of the entanglement-assisted discrimination protocol.

An input ``|psi_AB>`` (purification of the program state) is prepared, the
unknown measurement acts on ``A`` and returns outcome ``i``, and a binary
Helstrom measurement ``R_i`` on the ancilla ``B`` decides between the two
hypotheses. Priors are 1/2 each.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from . import linalg as la
from .errors import ShapeError
from .objects import DensityMatrix, VonNeumannMeasurement, purify

SNAP_TOL = 1e-12


def _unitary(u) -> np.ndarray:
    if isinstance(u, VonNeumannMeasurement):
        return u.unitary
    return VonNeumannMeasurement(u).unitary


@dataclass(frozen=True)
class Protocol:
    """Everything the simulator needs.

    ``ancilla[h, i]`` is the unnormalised ancilla vector after outcome ``i``
    under hypothesis ``h`` (0 for ``U``, 1 for ``V``); ``tests[i]`` projects
    onto the positive part of ``sigma_i^U - sigma_i^V`` (answer "U").
    """

    u: np.ndarray
    v: np.ndarray
    input_state: np.ndarray  # d x k, |psi> = sum_aj M[a, j] |a>|j>
    ancilla: np.ndarray  # (2, d, k)
    tests: np.ndarray  # (d, k, k)
    outcome_probabilities: np.ndarray  # (2, d)
    guess_first: np.ndarray  # (2, d): P(answer U | h, i)
    theoretical_success: float

    @property
    def ancilla_dimension(self) -> int:
        return self.input_state.shape[1]


def _positive_projector(delta):
    w, vecs = np.linalg.eigh(0.5 * (delta + la.dagger(delta)))
    # kernel goes to the "V" answer
    pos = vecs[:, w > SNAP_TOL]
    return pos @ la.dagger(pos)


def build_protocol(u, v=None, discriminator=None) -> Protocol:
    """Assemble the protocol for ``(P_U, P_V)`` and a discriminator in Choi
    convention (the input is the purification of its transpose)."""
    uu = _unitary(u)
    d = uu.shape[0]
    vv = np.eye(d, dtype=np.complex128) if v is None else _unitary(v)
    if vv.shape != uu.shape:
        raise ShapeError(f"measurements act on dimensions {d} and {vv.shape[0]}")
    if discriminator is None:
        discriminator = np.eye(d) / d
    rho = DensityMatrix(np.asarray(discriminator, dtype=np.complex128)).matrix
    if rho.shape[0] != d:
        raise ShapeError(f"discriminator of dimension {rho.shape[0]} for measurements on {d}")
    m = purify(rho.T).as_matrix()

    ancilla = np.stack([la.dagger(uu) @ m, la.dagger(vv) @ m])  # row i = (<h_i| (x) 1)|psi>
    probs = np.sum(np.abs(ancilla) ** 2, axis=2)
    k = m.shape[1]
    tests = np.empty((d, k, k), dtype=np.complex128)
    guess = np.zeros((2, d))
    total = 0.0
    for i in range(d):
        a, b = ancilla[0, i], ancilla[1, i]
        delta = np.outer(a, a.conj()) - np.outer(b, b.conj())
        tests[i] = _positive_projector(delta)
        total += la.trace_norm(delta)
        for h in range(2):
            p = probs[h, i]
            if p > 0:
                vec = ancilla[h, i]
                q = float(np.vdot(vec, tests[i] @ vec).real) / p
                if q > 1.0 - SNAP_TOL:
                    q = 1.0
                elif q < SNAP_TOL:
                    q = 0.0
                guess[h, i] = q
    return Protocol(uu, vv, m, ancilla, tests, probs, guess, 0.5 + 0.25 * total)


@dataclass(frozen=True)
class ProtocolRun:
    trials: int
    seed: int
    empirical_success: float
    theoretical_success: float
    standard_error: float
    hypotheses: np.ndarray = field(repr=False)
    outcomes: np.ndarray = field(repr=False)
    guesses: np.ndarray = field(repr=False)

    @property
    def deviation(self) -> float:
        return abs(self.empirical_success - self.theoretical_success)

    @property
    def within_three_sigma(self) -> bool:
        return self.deviation <= 3.0 * self.standard_error + 1e-15

    def transcript_bytes(self) -> bytes:
        return self.hypotheses.tobytes() + self.outcomes.tobytes() + self.guesses.tobytes()


def _cdfs(probs):
    c = np.cumsum(probs, axis=1)
    return c / c[:, -1:]


def simulate(protocol: Protocol, trials: int, seed: int, backend=None) -> ProtocolRun:
    """Run ``trials`` independent rounds; trial ``t`` draws its three uniforms
    from counters ``3t, 3t+1, 3t+2`` of a SplitMix64 stream keyed by ``seed``,
    so the transcript does not depend on the backend or on chunking."""
    trials = int(trials)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    hyp, out, guess = kernels.simulate_transcript(
        _cdfs(protocol.outcome_probabilities), protocol.guess_first, trials, seed, backend=backend
    )
    hyp, out, guess = np.asarray(hyp), np.asarray(out), np.asarray(guess)
    p = protocol.theoretical_success
    return ProtocolRun(
        trials=trials,
        seed=int(seed),
        empirical_success=float(np.mean(guess == hyp)),
        theoretical_success=p,
        standard_error=float(np.sqrt(max(0.0, p * (1.0 - p)) / trials)),
        hypotheses=hyp,
        outcomes=out,
        guesses=guess,
    )


__all__ = ["Protocol", "ProtocolRun", "build_protocol", "simulate"]
