"""Closed-form families: Fourier matrices and reflections ``1 - 2|x><x|``."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg as la
from .errors import ShapeError, SubsetCapError, ToleranceError
from .objects import VonNeumannMeasurement

SUBSET_SUM_TOL = 1e-9
SUBSET_CAP = 20
POLYGON_TOL = 1e-12


def fourier_matrix(d: int) -> VonNeumannMeasurement:
    """``F_d[j, k] = exp(2 pi i j k / d) / sqrt(d)``."""
    d = int(d)
    if d < 1:
        raise ShapeError("Fourier matrix needs d >= 1")
    jk = np.outer(np.arange(d), np.arange(d)) % d
    return VonNeumannMeasurement(np.exp(2j * np.pi * jk / d) / np.sqrt(d))


def _diag_residual(u, rho) -> float:
    return float(np.abs(np.einsum("ki,ki->i", u.conj(), rho)).sum())


def fourier_discriminator(d: int) -> np.ndarray:
    """Unit-trace rank <= 2 state with ``diag(F_d^dagger X) = 0``, for ``d >= 4``.

    Supported on ``|0>, |1>, |d-1>``; positive semidefinite exactly when
    ``cos(2 pi / d) >= 0``.
    """
    d = int(d)
    if d < 4:
        raise ShapeError("the Fourier discriminator is positive only for d >= 4")
    c = np.cos(2 * np.pi / d)
    x = np.zeros((d, d), dtype=np.complex128)
    idx = [0, 1, d - 1]
    block = np.array([[4 * c, -2 * c, -2 * c], [-2 * c, 1, 1], [-2 * c, 1, 1]])
    x[np.ix_(idx, idx)] = block
    x /= np.trace(x).real
    f = fourier_matrix(d).unitary
    res = np.abs(np.diagonal(la.dagger(f) @ x)).max()
    if res > 1e-10:
        raise ToleranceError(f"diag(F^dagger X) has entry {res:.3e}")
    if np.sum(np.linalg.eigvalsh(x) > 1e-10) > 2:
        raise ToleranceError("Fourier discriminator has rank above 2")
    return x


def fourier_rank1_discriminator(d: int, m: int, n: int) -> np.ndarray:
    """``(|0> - |mn>)(<0| - <mn|) / 2`` for ``d = m^2 n`` with ``m > 1``."""
    d, m, n = int(d), int(m), int(n)
    if m < 2 or n < 1 or m * m * n != d:
        raise ShapeError(f"need d = m^2 n with m > 1; got d={d}, m={m}, n={n}")
    v = np.zeros(d, dtype=np.complex128)
    v[0], v[m * n] = 1.0, -1.0
    x = np.outer(v, v.conj()) / 2.0
    f = fourier_matrix(d).unitary
    if np.abs(np.diagonal(la.dagger(f) @ x)).max() > 1e-10:
        raise ToleranceError("rank-one Fourier discriminator failed its diagonal check")
    return x


def square_factorizations(d: int) -> list[tuple[int, int]]:
    """All ``(m, n)`` with ``d = m^2 n`` and ``m > 1``."""
    out = []
    m = 2
    while m * m <= d:
        if d % (m * m) == 0:
            out.append((m, d // (m * m)))
        m += 1
    return out


@dataclass(frozen=True)
class ReflectionSpec:
    axis: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.axis, dtype=np.complex128).reshape(-1)
        if x.size < 1:
            raise ShapeError("empty reflection axis")
        nrm = np.linalg.norm(x)
        if abs(nrm - 1.0) > 1e-10:
            raise ToleranceError(f"reflection axis has norm {nrm!r}, expected 1")
        object.__setattr__(self, "axis", x)

    @property
    def dim(self) -> int:
        return self.axis.size

    @property
    def omega(self) -> float:
        return float(np.max(np.abs(self.axis) ** 2))

    @classmethod
    def uniform(cls, d: int) -> "ReflectionSpec":
        return cls(np.full(d, 1.0 / np.sqrt(d), dtype=np.complex128))

    @classmethod
    def with_omega(cls, d: int, omega: float, phases=None) -> "ReflectionSpec":
        """Axis with ``|x_0|^2 = omega`` and the rest spread evenly.

        Needs ``omega >= 1/d`` so that ``x_0`` stays the largest entry.
        """
        if d == 1:
            return cls(np.ones(1))
        if not (1.0 / d - 1e-12 <= omega <= 1.0):
            raise ToleranceError(f"omega={omega} outside [1/{d}, 1]")
        mags = np.full(d, np.sqrt(max(0.0, (1.0 - omega) / (d - 1))))
        mags[0] = np.sqrt(omega)
        ph = np.zeros(d) if phases is None else np.asarray(phases, dtype=float)
        return cls(mags * np.exp(1j * ph))


def reflection_matrix(spec: ReflectionSpec) -> VonNeumannMeasurement:
    x = spec.axis
    return VonNeumannMeasurement(np.eye(x.size, dtype=np.complex128) - 2.0 * np.outer(x, x.conj()))


def close_polygon_phases(weights) -> np.ndarray:
    """Angles ``beta`` with ``sum_i w_i exp(i beta_i) = 0``.

    Weights are split greedily (largest first, each to the lightest group)
    into three groups of total at most half the sum; the group totals are
    then the sides of a triangle whose angles follow from the law of
    cosines, and every weight takes its group's direction.
    """
    w = np.asarray(weights, dtype=float).reshape(-1)
    if np.any(w < 0):
        raise ToleranceError("weights must be non-negative")
    total = float(w.sum())
    if w.size == 0 or total == 0.0:
        return np.zeros(w.size)
    if w.max() > 0.5 * total + POLYGON_TOL * max(1.0, total):
        raise ToleranceError(f"polygon inequality fails: max weight {w.max()!r} > half of {total!r}")

    groups = np.zeros(3)
    member = np.empty(w.size, dtype=int)
    for i in sorted(range(w.size), key=lambda i: (-w[i], i)):
        g = int(np.argmin(groups))
        member[i] = g
        groups[g] += w[i]
    a, b, c = groups
    if b == 0.0:
        # two equal sides only: a = c
        dirs = np.array([0.0, 0.0, np.pi])
    else:
        cos_c = np.clip((a * a + b * b - c * c) / (2 * a * b), -1.0, 1.0)
        theta_b = np.pi - np.arccos(cos_c)
        tail = -a - b * np.exp(1j * theta_b)
        theta_c = float(np.angle(tail)) if abs(tail) > 0 else 0.0
        dirs = np.array([0.0, theta_b, theta_c])
    return np.mod(dirs[member], 2 * np.pi)


def subset_with_sum(weights, target=0.5, tol=SUBSET_SUM_TOL, cap=SUBSET_CAP):
    """Smallest-index-first subset of ``weights`` summing to ``target`` within ``tol``, or None.

    Exhaustive: the table of all ``2^d`` subset sums is built by doubling.
    """
    w = np.asarray(weights, dtype=float).reshape(-1)
    if w.size > cap:
        raise SubsetCapError(f"subset-sum enumeration over 2^{w.size} exceeds cap={cap}")
    sums = np.zeros(1)
    for x in w:
        sums = np.concatenate([sums, sums + x])
    hits = np.nonzero(np.abs(sums - target) <= tol)[0]
    if hits.size == 0:
        return None
    masks = [int(h) for h in hits]
    best = min(masks, key=lambda m: (bin(m).count("1"), [i for i in range(w.size) if (m >> i) & 1]))
    return tuple(i for i in range(w.size) if (best >> i) & 1)


@dataclass(frozen=True)
class ReflectionResult:
    """``program_state`` satisfies ``diag(U^dagger rho) = 0`` when perfect;
    ``discriminator`` is its transpose (Choi convention)."""

    diamond: float
    nu: float
    perfect: bool
    rank1_possible: bool
    rank1_subset: tuple | None
    program_state: np.ndarray
    discriminator: np.ndarray


def reflection_diamond(spec: ReflectionSpec) -> ReflectionResult:
    x = spec.axis
    d = x.size
    omega = spec.omega
    weights = np.abs(x) ** 2
    if d > SUBSET_CAP:
        raise SubsetCapError(f"d={d} exceeds subset cap {SUBSET_CAP}")
    if omega <= 0.5 + POLYGON_TOL:
        beta = close_polygon_phases(weights)
        alpha = np.angle(x) - beta
        y = np.abs(x) * np.exp(1j * alpha)
        rho = 0.5 * np.outer(x, x.conj()) + 0.5 * np.outer(y, y.conj())
        subset = subset_with_sum(weights)
        return ReflectionResult(2.0, 0.0, True, subset is not None, subset, rho, rho.T.copy())

    nu = 2.0 * omega - 1.0
    diamond = float(2.0 * np.sqrt(max(0.0, 1.0 - nu * nu)))
    k = int(np.argmax(weights))
    e = np.zeros(d, dtype=np.complex128)
    e[k] = 1.0
    # half the projector onto span{x, e_k}
    q, _ = np.linalg.qr(np.stack([e, x], axis=1))
    rank = 1 if abs(abs(x[k]) - 1.0) <= 1e-12 else 2
    q = q[:, :rank]
    rho = q @ la.dagger(q) / rank
    return ReflectionResult(diamond, nu, False, False, None, rho, rho.T.copy())


__all__ = [
    "ReflectionResult",
    "ReflectionSpec",
    "close_polygon_phases",
    "fourier_discriminator",
    "fourier_matrix",
    "fourier_rank1_discriminator",
    "reflection_diamond",
    "reflection_matrix",
    "square_factorizations",
    "subset_with_sum",
]
