"""Numerical-range geometry.

For a normal matrix the numerical range is the convex hull of its spectrum,
so the distance from the origin to it is a planar polygon computation. For
general matrices membership of the origin is decided by rotating the matrix
and looking for a half-plane that separates ``W(A)`` from zero.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import schur
from scipy.optimize import minimize_scalar

from . import linalg as la
from .errors import ToleranceError

MEMBERSHIP_TOL = 1e-9
THETA_GRID = 721
THETA_RESOLUTION = 1e-6


def _cross(o: complex, a: complex, b: complex) -> float:
    return (a.real - o.real) * (b.imag - o.imag) - (a.imag - o.imag) * (b.real - o.real)


def convex_hull(points) -> list[int]:
    """Indices of hull vertices in counter-clockwise order (Andrew's monotone chain).

    Collinear and duplicate points are dropped, keeping extreme points only.
    """
    pts = np.asarray(points, dtype=np.complex128).reshape(-1)
    order = sorted(range(pts.size), key=lambda i: (pts[i].real, pts[i].imag))
    scale = max(1.0, float(np.abs(pts).max())) if pts.size else 1.0
    eps = 1e-14 * scale * scale
    uniq = []
    for i in order:
        if uniq and abs(pts[i] - pts[uniq[-1]]) <= 1e-13 * scale:
            continue
        uniq.append(i)
    if len(uniq) <= 2:
        return uniq

    def half(seq):
        chain = []
        for i in seq:
            while len(chain) >= 2 and _cross(pts[chain[-2]], pts[chain[-1]], pts[i]) <= eps:
                chain.pop()
            chain.append(i)
        return chain

    lower = half(uniq)
    upper = half(reversed(uniq))
    hull = lower[:-1] + upper[:-1]
    return hull


@dataclass(frozen=True)
class SpectrumHull:
    eigenvalues: np.ndarray
    hull_vertices: np.ndarray
    vertex_indices: tuple

    @classmethod
    def from_eigenvalues(cls, eigenvalues) -> "SpectrumHull":
        lam = np.asarray(eigenvalues, dtype=np.complex128).reshape(-1)
        idx = tuple(convex_hull(lam))
        return cls(lam, lam[list(idx)], idx)

    def is_convex(self) -> bool:
        v = self.hull_vertices
        if v.size < 3:
            return True
        n = v.size
        return all(_cross(v[k], v[(k + 1) % n], v[(k + 2) % n]) > 0 for k in range(n))


@dataclass(frozen=True)
class HullDistance:
    """Distance from 0 to ``conv(spec(A))`` with a convex-combination witness.

    ``weights[j]`` multiplies ``eigenvalues[j]``; ``witness_state()`` is the
    matching density matrix, diagonal in the eigenbasis.
    """

    distance: float
    weights: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray = field(repr=False)
    hull: SpectrumHull = field(repr=False)

    def witness_point(self) -> complex:
        return complex(np.dot(self.weights, self.eigenvalues))

    def witness_state(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.weights) @ la.dagger(v)


def _segment_closest(a: complex, b: complex):
    ab = b - a
    den = abs(ab) ** 2
    if den == 0.0:
        return abs(a), 0.0
    t = min(1.0, max(0.0, -(np.conj(ab) * a).real / den))
    return abs(a + t * ab), t


def _barycentric_zero(a: complex, b: complex, c: complex):
    det = _cross(a, b, c)
    if det == 0.0:
        return None
    wa = _cross(0j, b, c) / det
    wb = _cross(a, 0j, c) / det
    wc = _cross(a, b, 0j) / det
    return wa, wb, wc


def hull_distance_from_eigen(eigenvalues, eigenvectors=None) -> HullDistance:
    lam = np.asarray(eigenvalues, dtype=np.complex128).reshape(-1)
    if eigenvectors is None:
        eigenvectors = np.eye(lam.size, dtype=np.complex128)
    hull = SpectrumHull.from_eigenvalues(lam)
    idx = hull.vertex_indices
    w = np.zeros(lam.size)
    if len(idx) == 1:
        w[idx[0]] = 1.0
        return HullDistance(float(abs(lam[idx[0]])), w, lam, eigenvectors, hull)

    n = len(idx)
    inside = n >= 3 and all(_cross(lam[idx[k]], lam[idx[(k + 1) % n]], 0j) > 0 for k in range(n))
    if inside:
        for k in range(1, n - 1):
            bary = _barycentric_zero(lam[idx[0]], lam[idx[k]], lam[idx[k + 1]])
            if bary is not None and min(bary) >= -1e-15:
                bary = np.clip(bary, 0.0, None)
                bary = bary / bary.sum()
                w[idx[0]] += bary[0]
                w[idx[k]] += bary[1]
                w[idx[k + 1]] += bary[2]
                return HullDistance(0.0, w, lam, eigenvectors, hull)

    edges = [(idx[k], idx[(k + 1) % n]) for k in range(n if n >= 3 else 1)]
    best = None
    for i, j in edges:
        dist, t = _segment_closest(lam[i], lam[j])
        if best is None or dist < best[0]:
            best = (dist, i, j, t)
    dist, i, j, t = best
    w[i] += 1.0 - t
    w[j] += t
    return HullDistance(float(dist), w, lam, eigenvectors, hull)


def dist_zero_to_hull(a) -> HullDistance:
    """Distance from 0 to the numerical range of a normal matrix."""
    a = la.as_square(a)
    if not la.is_normal(a):
        raise ToleranceError("dist_zero_to_hull needs a normal matrix")
    t, z = schur(a, output="complex")
    return hull_distance_from_eigen(np.diagonal(t).copy(), z)


def unitary_channel_distance(u) -> float:
    """Diamond distance ``2 sqrt(1 - nu^2)`` between ``rho -> U rho U^dagger`` and the identity channel."""
    u = la.as_square(u)
    if not la.is_unitary(u):
        raise ToleranceError("unitary_channel_distance needs a unitary matrix")
    # sqrt(1 - nu^2) = sin(G / 2) for the largest eigenphase gap G; no cancellation near nu = 1
    theta = np.sort(np.mod(np.angle(np.linalg.eigvals(u)), 2 * np.pi))
    gaps = np.diff(np.concatenate([theta, [theta[0] + 2 * np.pi]]))
    g = float(gaps.max())
    if g <= np.pi:
        return 2.0
    if g >= 2 * np.pi:
        return 0.0
    return float(2.0 * abs(np.sin(g / 2.0)))


@dataclass(frozen=True)
class NumericalRangeTest:
    """Result of the origin-membership test.

    ``margin`` is ``max_theta lambda_min(Re(e^{i theta} A))``: positive means a
    separating half-plane exists (0 outside ``W(A)``). ``status`` is one of
    ``"outside"``, ``"inside"``, ``"boundary-inconclusive"``.
    """

    contains_zero: bool
    status: str
    margin: float
    theta: float


def _rotated_min_eigs(hr, hi, thetas):
    mats = np.cos(thetas)[:, None, None] * hr - np.sin(thetas)[:, None, None] * hi
    return np.linalg.eigvalsh(mats)[:, 0]


def numerical_range_test(a, tol=MEMBERSHIP_TOL) -> NumericalRangeTest:
    a = la.as_square(a)
    if la.is_hermitian(a, 1e-14):
        lam = np.linalg.eigvalsh(0.5 * (a + la.dagger(a)))
        margin = max(lam[0], -lam[-1])
        theta = 0.0 if lam[0] >= -lam[-1] else np.pi
    else:
        hr = 0.5 * (a + la.dagger(a))
        hi = (a - la.dagger(a)) / 2j
        thetas = np.linspace(0.0, 2 * np.pi, THETA_GRID)
        vals = _rotated_min_eigs(hr, hi, thetas)
        k = int(np.argmax(vals))
        step = thetas[1] - thetas[0]
        res = minimize_scalar(
            lambda t: -_rotated_min_eigs(hr, hi, np.array([t]))[0],
            bounds=(thetas[k] - step, thetas[k] + step),
            method="bounded",
            options={"xatol": THETA_RESOLUTION},
        )
        if -res.fun >= vals[k]:
            margin, theta = float(-res.fun), float(res.x)
        else:
            margin, theta = float(vals[k]), float(thetas[k])
    if margin > tol:
        status = "outside"
    elif margin < -tol:
        status = "inside"
    else:
        status = "boundary-inconclusive"
    return NumericalRangeTest(bool(margin <= tol), status, float(margin), float(theta))


def zero_in_numerical_range(a, tol=MEMBERSHIP_TOL) -> bool:
    return numerical_range_test(a, tol).contains_zero
