"""States, measurements and channels in matrix form.

Tensor factors are ordered (output label) (x) (input), so the Choi matrix of
a measure-and-prepare channel is ``sum_i |i><i| (x) T_i^T`` and tracing out
the first factor of a trace-preserving map yields the identity.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import linalg as la
from .errors import ShapeError, ToleranceError

STATE_TOL = 1e-8
RANK_TOL = 1e-10


@dataclass(frozen=True)
class DensityMatrix:
    matrix: np.ndarray

    def __post_init__(self):
        m = la.as_square(self.matrix, "density matrix")
        m = la.hermitize(m, "density matrix")
        lam = np.linalg.eigvalsh(m)
        if lam[0] < -STATE_TOL:
            raise ToleranceError(f"density matrix has eigenvalue {lam[0]:.3e} < 0")
        tr = np.trace(m).real
        if abs(tr - 1.0) > STATE_TOL:
            raise ToleranceError(f"density matrix has trace {tr!r}, expected 1")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def rank(self, tol=RANK_TOL) -> int:
        return int(np.sum(np.linalg.eigvalsh(self.matrix) > tol))


@dataclass(frozen=True)
class Povm:
    effects: tuple

    def __post_init__(self):
        effects = tuple(la.hermitize(e, f"effect {i}") for i, e in enumerate(self.effects))
        if not effects:
            raise ShapeError("a POVM needs at least one effect")
        d = effects[0].shape[0]
        for i, e in enumerate(effects):
            if e.shape != (d, d):
                raise ShapeError(f"effect {i} has shape {e.shape}, expected {(d, d)}")
            lam = np.linalg.eigvalsh(e)
            if lam[0] < -STATE_TOL:
                raise ToleranceError(f"effect {i} is not PSD (eigenvalue {lam[0]:.3e})")
        total = np.sum(effects, axis=0)
        err = np.linalg.norm(total - np.eye(d))
        if err > STATE_TOL:
            raise ToleranceError(f"effects sum to identity only within {err:.3e}")
        object.__setattr__(self, "effects", effects)

    @property
    def dim(self) -> int:
        return self.effects[0].shape[0]

    @property
    def n_outcomes(self) -> int:
        return len(self.effects)

    def stacked(self) -> np.ndarray:
        return np.stack(self.effects)


@dataclass(frozen=True)
class VonNeumannMeasurement:
    """Rank-one projective measurement given by the columns of a unitary.

    Outcome ``i`` (0-based) corresponds to the effect ``|u_i><u_i|`` where
    ``u_i`` is column ``i`` of ``unitary``.
    """

    unitary: np.ndarray

    def __post_init__(self):
        u = la.as_square(self.unitary, "unitary")
        if not la.is_unitary(u, STATE_TOL):
            err = np.linalg.norm(la.dagger(u) @ u - np.eye(u.shape[0]))
            raise ToleranceError(f"matrix is not unitary: ||U^dagger U - 1||_F = {err:.3e}")
        object.__setattr__(self, "unitary", u)

    @property
    def dim(self) -> int:
        return self.unitary.shape[0]

    def effects(self) -> np.ndarray:
        u = self.unitary
        return np.einsum("ai,bi->iab", u, u.conj())

    def povm(self) -> Povm:
        return Povm(tuple(self.effects()))


@dataclass(frozen=True)
class ChoiMatrix:
    matrix: np.ndarray
    dims: tuple  # (d_out, d_in)

    def __post_init__(self):
        m = la.as_square(self.matrix, "Choi matrix")
        d_out, d_in = (int(x) for x in self.dims)
        if m.shape[0] != d_out * d_in:
            raise ShapeError(f"Choi matrix of size {m.shape[0]} does not match dims {self.dims}")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dims", (d_out, d_in))

    def __sub__(self, other: "ChoiMatrix") -> "ChoiMatrix":
        if self.dims != other.dims:
            raise ShapeError(f"Choi dims differ: {self.dims} vs {other.dims}")
        return ChoiMatrix(self.matrix - other.matrix, self.dims)


@dataclass(frozen=True)
class ChannelFlags:
    hermiticity_preserving: bool
    completely_positive: bool
    trace_preserving: bool


def _state_matrix(rho) -> np.ndarray:
    if isinstance(rho, DensityMatrix):
        return rho.matrix
    return DensityMatrix(rho).matrix


def _effects_of(m) -> np.ndarray:
    if isinstance(m, VonNeumannMeasurement):
        return m.effects()
    if isinstance(m, Povm):
        return m.stacked()
    raise TypeError(f"expected Povm or VonNeumannMeasurement, got {type(m).__name__}")


def outcome_probabilities(m, rho) -> np.ndarray:
    effects = _effects_of(m)
    r = _state_matrix(rho)
    if effects.shape[1] != r.shape[0]:
        raise ShapeError(f"measurement on dimension {effects.shape[1]} applied to state of dimension {r.shape[0]}")
    return np.einsum("iab,ba->i", effects, r).real


def apply_measure_and_prepare(m, rho) -> DensityMatrix:
    """Diagonal output state ``sum_i Tr(rho T_i) |i><i|``."""
    return DensityMatrix(np.diag(outcome_probabilities(m, rho)).astype(np.complex128))


def choi_of_measurement(m) -> ChoiMatrix:
    effects = _effects_of(m)
    n, d, _ = effects.shape
    j = np.zeros((n * d, n * d), dtype=np.complex128)
    for i in range(n):
        j[i * d:(i + 1) * d, i * d:(i + 1) * d] = effects[i].T
    return ChoiMatrix(j, (n, d))


def choi_of_unitary(u) -> ChoiMatrix:
    """Choi matrix ``|U>><<U|`` of the unitary channel ``rho -> U rho U^dagger``."""
    u = la.as_square(u, "unitary")
    if not la.is_unitary(u, STATE_TOL):
        raise ToleranceError("choi_of_unitary needs a unitary matrix")
    v = la.vectorize(u)
    d = u.shape[0]
    return ChoiMatrix(np.outer(v, v.conj()), (d, d))


def channel_property_checks(choi: ChoiMatrix, tol=STATE_TOL) -> ChannelFlags:
    j = choi.matrix
    d_out, d_in = choi.dims
    hp = la.is_hermitian(j, tol)
    cp = False
    if hp:
        cp = bool(np.linalg.eigvalsh(0.5 * (j + la.dagger(j)))[0] >= -tol)
    tp = bool(np.linalg.norm(la.partial_trace_first(j, (d_out, d_in)) - np.eye(d_in)) <= tol)
    return ChannelFlags(hp, cp, tp)


def _check_probability_vector(p, name):
    p = np.asarray(p, dtype=float).reshape(-1)
    if np.any(p < -1e-10):
        raise ToleranceError(f"{name} has negative entries")
    if abs(p.sum() - 1.0) > STATE_TOL:
        raise ToleranceError(f"{name} sums to {p.sum()!r}, expected 1")
    return p


def total_variation(p, q) -> float:
    """l1 distance ``sum_i |p_i - q_i|`` between probability vectors."""
    p = _check_probability_vector(p, "p")
    q = _check_probability_vector(q, "q")
    if p.shape != q.shape:
        raise ShapeError(f"probability vectors have lengths {p.size} and {q.size}")
    return float(np.abs(p - q).sum())


def helstrom_state_bound(rho, sigma) -> float:
    r = _state_matrix(rho)
    s = _state_matrix(sigma)
    if r.shape != s.shape:
        raise ShapeError(f"states have dimensions {r.shape[0]} and {s.shape[0]}")
    return 0.5 + 0.25 * la.trace_norm(r - s)


@dataclass(frozen=True)
class Purification:
    """Unit vector on ``dims = (d, k)`` stored row-major (index ``a*k + j``)."""

    vector: np.ndarray
    dims: tuple
    schmidt_rank: int

    def as_matrix(self) -> np.ndarray:
        return self.vector.reshape(self.dims)

    def reduced_first(self) -> np.ndarray:
        m = self.as_matrix()
        return m @ la.dagger(m)


def purify(rho, tol=RANK_TOL) -> Purification:
    """Minimal purification: ancilla dimension equals the numerical rank of ``rho``."""
    r = _state_matrix(rho)
    lam, vecs = np.linalg.eigh(r)
    keep = lam > tol
    lam = lam[keep][::-1]
    vecs = vecs[:, keep][:, ::-1]
    k = int(lam.size)
    psi = vecs * np.sqrt(lam)
    psi = psi / np.linalg.norm(psi)
    return Purification(psi.reshape(-1), (r.shape[0], k), k)
