"""Primal-dual solver for the measurement distance.

For a unitary ``U`` the diamond distance between ``P_U`` and the
computational-basis measurement is ``2 sqrt(1 - nu^2)`` with

    nu = min_rho sum_i |z_i(rho)|,    z_i(rho) = <i|U^dagger rho|i>,

the minimum taken over density matrices. Any state gives an upper bound on
``nu`` (the primal value) and any diagonal unitary ``E = diag(exp(i phi))``
gives a lower bound, the distance from 0 to the convex hull of
``spec(U E)`` (the dual value). ``solve_nu`` returns both, together with the
witnesses that produce them.

The primal is minimised in three stages: Frank-Wolfe on the smoothed
objective ``sum_i sqrt(|z_i|^2 + mu^2)`` starting from the maximally mixed
state, a factorised ``rho = A A^dagger / Tr`` quasi-Newton polish with
``mu`` driven towards zero, and, when the dual shows ``nu`` is zero, the
alternating-projection feasibility polish of ``polish_feasible``.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from . import linalg as la
from .geometry import dist_zero_to_hull
from .objects import VonNeumannMeasurement

FEASIBILITY_TOL = 1e-9


def default_gap() -> float:
    try:
        return float(os.environ.get("POVM_DUEL_GAP", "1e-6"))
    except ValueError:
        return 1e-6


@dataclass
class SolverOptions:
    gap: float = field(default_factory=default_gap)
    max_iter: int = 20000
    mu0: float = 0.1
    anneal: int = 50
    fw_iters: int = 300
    check_every: int = 25
    polish_mus: tuple = (1e-3, 1e-5, 1e-7, 1e-9, 1e-11)
    restarts: int = 5
    seed: int = 0
    dykstra_sweeps: int = 5000

    def as_dict(self) -> dict:
        return {
            "gap": self.gap,
            "max_iter": self.max_iter,
            "mu0": self.mu0,
            "anneal": self.anneal,
            "fw_iters": self.fw_iters,
            "check_every": self.check_every,
            "polish_mus": list(self.polish_mus),
            "restarts": self.restarts,
            "seed": self.seed,
            "dykstra_sweeps": self.dykstra_sweeps,
        }


@dataclass(frozen=True)
class CertificatePair:
    """Primal state and dual phases bracketing ``nu``.

    ``dual_value <= nu <= primal_value``; ``gap = primal_value - dual_value``.
    """

    primal_state: np.ndarray
    primal_value: float
    dual_phases: np.ndarray
    dual_value: float
    gap: float


@dataclass
class SolveResult:
    certificate: CertificatePair
    converged: bool
    iterations: int
    history: list = field(default_factory=list)  # (iteration, stage, primal, dual)
    fw_smoothed: list = field(default_factory=list)  # (epoch, smoothed value after step)


def _unitary(u) -> np.ndarray:
    if isinstance(u, VonNeumannMeasurement):
        return u.unitary
    return VonNeumannMeasurement(u).unitary


def diag_overlaps(u: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """``z_i = <i|U^dagger rho|i> = <u_i|rho|i>``."""
    return np.einsum("ki,ki->i", u.conj(), rho)


def primal_value(u, rho) -> float:
    return float(np.abs(diag_overlaps(np.asarray(u), np.asarray(rho))).sum())


def dual_value(u, phases) -> float:
    """Distance from 0 to ``conv(spec(U diag(exp(i phases))))``."""
    u = np.asarray(u, dtype=np.complex128)
    e = np.exp(1j * np.asarray(phases, dtype=float))
    return float(dist_zero_to_hull(u * e[None, :]).distance)


def aligned_phases(z: np.ndarray) -> np.ndarray:
    """Phases making every ``<i|rho U E|i> = conj(z_i) exp(i phi_i)`` real and non-negative."""
    return np.where(np.abs(z) > 0, np.angle(z), 0.0)


def _smoothed_gradient(u, z, mu):
    s = np.sqrt(np.abs(z) ** 2 + mu * mu)
    c = z.conj() / (2.0 * s)
    g = c[:, None] * la.dagger(u)
    return s, g + la.dagger(g)


def _frank_wolfe(u, opts: SolverOptions, result: SolveResult, budget: int):
    d = u.shape[0]
    rho = np.eye(d, dtype=np.complex128) / d
    z = diag_overlaps(u, rho)
    best_rho, best_val = rho.copy(), float(np.abs(z).sum())
    k = 0
    for k in range(budget):
        epoch = k // opts.anneal
        mu = opts.mu0 / (1.0 + epoch)
        _, grad = _smoothed_gradient(u, z, mu)
        _, vecs = np.linalg.eigh(grad)
        v = vecs[:, 0]
        z_s = (la.dagger(u) @ v) * v.conj()
        dz = z_s - z

        def phi(g):
            return float(np.sqrt(np.abs(z + g * dz) ** 2 + mu * mu).sum())

        res = minimize_scalar(phi, bounds=(0.0, 1.0), method="bounded", options={"xatol": 1e-12})
        f0 = phi(0.0)
        step = float(res.x) if res.fun < f0 else 0.0
        rho = (1.0 - step) * rho + step * np.outer(v, v.conj())
        z = z + step * dz
        result.fw_smoothed.append((epoch, min(float(res.fun), f0)))

        val = float(np.abs(z).sum())
        if val < best_val:
            best_rho, best_val = rho.copy(), val
        if (k + 1) % opts.check_every == 0:
            dual = dual_value(u, aligned_phases(z))
            result.history.append((k + 1, "frank-wolfe", val, dual))
            if best_val - dual <= opts.gap:
                return best_rho, k + 1
    return best_rho, k + 1 if budget else 0


def _factor(rho):
    w, v = np.linalg.eigh(0.5 * (rho + la.dagger(rho)))
    a = v * np.sqrt(np.clip(w, 0.0, None))
    # keep every column alive so the factorisation can leave the current face
    return a + 1e-8 * v


def _polish(u, rho, opts: SolverOptions, result: SolveResult, budget: int, start_iter: int):
    d = u.shape[0]
    a = _factor(rho)
    x = np.concatenate([a.real.ravel(), a.imag.ravel()])
    used = 0
    per_stage = max(1, budget // max(1, len(opts.polish_mus)))
    for mu in opts.polish_mus:
        if used >= budget:
            break

        def fg(x, mu=mu):
            a = (x[: d * d] + 1j * x[d * d:]).reshape(d, d)
            t = float(np.vdot(a, a).real)
            r = a @ la.dagger(a) / t
            s, grad = _smoothed_gradient(u, diag_overlaps(u, r), mu)
            m = (grad @ a - np.real(np.vdot(grad, r)) * a) * (2.0 / t)
            return float(s.sum()), np.concatenate([m.real.ravel(), m.imag.ravel()])

        res = minimize(fg, x, jac=True, method="L-BFGS-B",
                       options={"maxiter": min(per_stage, budget - used), "ftol": 1e-16, "gtol": 1e-14})
        x = res.x
        used += int(res.nit)
        a = (x[: d * d] + 1j * x[d * d:]).reshape(d, d)
        r = a @ la.dagger(a)
        r = r / np.trace(r).real
        z = diag_overlaps(u, r)
        result.history.append((start_iter + used, f"polish(mu={mu:g})", float(np.abs(z).sum()),
                               dual_value(u, aligned_phases(z))))
    a = (x[: d * d] + 1j * x[d * d:]).reshape(d, d)
    r = a @ la.dagger(a)
    return 0.5 * (r + la.dagger(r)) / np.trace(r).real, used


def arc_gap(u, phases):
    """Largest angular gap between eigenphases of ``U diag(exp(i phases))`` and
    its gradient with respect to ``phases``.

    With all eigenvalues inside an arc of width ``2 pi - gap`` the hull distance
    is ``max(0, -cos(gap / 2))``; d(arg lambda_k)/d(phi_j) = |v_kj|^2.
    """
    lam, vecs = np.linalg.eig(u * np.exp(1j * phases)[None, :])
    theta = np.angle(lam)
    order = np.argsort(theta)
    theta = theta[order]
    vecs = vecs[:, order]
    gaps = np.diff(np.concatenate([theta, [theta[0] + 2 * np.pi]]))
    k = int(np.argmax(gaps))
    lo, hi = k, (k + 1) % theta.size
    norms = np.sum(np.abs(vecs) ** 2, axis=0)
    grad = np.abs(vecs[:, hi]) ** 2 / norms[hi] - np.abs(vecs[:, lo]) ** 2 / norms[lo]
    return float(gaps[k]), grad


def _ascend(u, phases, max_iter=500):
    seen = {"x": np.array(phases, dtype=float), "f": arc_gap(u, phases)[0]}

    def obj(p):
        g, grad = arc_gap(u, p)
        if g > seen["f"]:
            seen["x"], seen["f"] = p.copy(), g
        return -g, -grad

    minimize(obj, np.array(phases, dtype=float), jac=True, method="BFGS",
             options={"gtol": 1e-14, "maxiter": max_iter})
    return seen["x"]


def refine_dual(u, phases, restarts: int, rng) -> tuple[np.ndarray, float]:
    """Local ascent of the dual from ``phases`` plus ``restarts`` random starts."""
    d = u.shape[0]
    best = np.array(phases, dtype=float)
    best_val = dual_value(u, best)
    starts = [best] + [rng.uniform(0.0, 2 * np.pi, d) for _ in range(restarts)]
    for p0 in starts:
        p = _ascend(u, p0)
        val = dual_value(u, p)
        if val > best_val:
            best, best_val = p, val
    return np.mod(best, 2 * np.pi), best_val


@dataclass(frozen=True)
class ConstraintFamily:
    """Hermitian matrices ``A_1..A_2d`` with ``Tr(rho A_i) = 0`` for all ``i``
    exactly when ``diag(U^dagger rho) = 0``; ``A_0`` is the identity.

    ``A_i = U|i><i| + |i><i|U^dagger`` and
    ``A_{d+i} = i(|i><i|U^dagger - U|i><i|)``.
    """

    matrices: tuple

    @classmethod
    def from_unitary(cls, u) -> "ConstraintFamily":
        u = _unitary(u)
        d = u.shape[0]
        mats = []
        for i in range(d):
            p = np.zeros((d, d), dtype=np.complex128)
            p[i, i] = 1.0
            mats.append(u @ p + p @ la.dagger(u))
        for i in range(d):
            p = np.zeros((d, d), dtype=np.complex128)
            p[i, i] = 1.0
            mats.append(1j * (p @ la.dagger(u) - u @ p))
        return cls(tuple(mats))

    @property
    def identity(self) -> np.ndarray:
        d = self.matrices[0].shape[0]
        return np.eye(d, dtype=np.complex128)

    def values(self, rho) -> np.ndarray:
        return np.array([np.vdot(a, rho).real for a in self.matrices])

    def projector(self):
        """Orthogonal projection of Hermitian matrices onto ``{X : Tr(X A_i) = 0}``."""
        stack = np.stack(self.matrices)
        gram = np.einsum("iab,jab->ij", stack.conj(), stack).real
        pinv = np.linalg.pinv(gram, rcond=1e-12)

        def project(x):
            t = np.einsum("iab,ab->i", stack.conj(), x).real
            return x - np.einsum("i,iab->ab", pinv @ t, stack)

        return project


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection of a real vector onto the probability simplex."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.arange(1, v.size + 1)
    r = k[u - css / k > 0][-1]
    return np.maximum(v - css[r - 1] / r, 0.0)


def project_spectrahedron(x: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(0.5 * (x + la.dagger(x)))
    p = project_simplex(w)
    return (v * p) @ la.dagger(v)


def _face_correction(u, rho, family: ConstraintFamily):
    """Least-norm correction of ``rho`` inside its own face of the PSD cone."""
    w, v = np.linalg.eigh(rho)
    keep = w > 1e-12
    vr = v[:, keep]
    r = vr.shape[1]
    if r == 0:
        return rho
    x = la.dagger(vr) @ rho @ vr
    # real coordinates of Hermitian r x r matrices
    basis = []
    for a in range(r):
        for b in range(a, r):
            e = np.zeros((r, r), dtype=np.complex128)
            if a == b:
                e[a, a] = 1.0
                basis.append(e)
            else:
                e[a, b] = e[b, a] = 1.0
                basis.append(e.copy())
                e[a, b], e[b, a] = 1j, -1j
                basis.append(e)
    reduced = [la.dagger(vr) @ m @ vr for m in family.matrices] + [np.eye(r)]
    lin = np.array([[np.vdot(m, e).real for e in basis] for m in reduced])
    target = np.zeros(len(reduced))
    target[-1] = 1.0
    current = np.array([np.vdot(m, x).real for m in reduced])
    delta, *_ = np.linalg.lstsq(lin, target - current, rcond=None)
    x_new = x + sum(c * e for c, e in zip(delta, basis))
    if np.linalg.eigvalsh(0.5 * (x_new + la.dagger(x_new)))[0] < 0:
        return rho
    out = vr @ x_new @ la.dagger(vr)
    return 0.5 * (out + la.dagger(out))


@dataclass(frozen=True)
class FeasibilityResult:
    state: np.ndarray
    residual: float
    sweeps: int


def polish_feasible(u, rho0, max_sweeps=5000, tol=FEASIBILITY_TOL * 1e-3) -> FeasibilityResult:
    """Dykstra's alternating projections between the state space and
    ``{rho : diag(U^dagger rho) = 0}``, finished by a face-restricted
    least-norm correction. ``residual`` is ``||diag(U^dagger rho)||_1`` of the
    returned density matrix. Sweeps continue to ``tol``, well below the
    certification threshold, unless the cap is hit first."""
    u = _unitary(u)
    family = ConstraintFamily.from_unitary(u)
    project_affine = family.projector()

    def residual(r):
        return float(np.abs(diag_overlaps(u, r)).sum())

    y = project_spectrahedron(np.asarray(rho0, dtype=np.complex128))
    best, best_res = y, residual(y)
    x = y.copy()
    p = np.zeros_like(x)
    sweeps = 0
    while best_res > tol and sweeps < max_sweeps:
        sweeps += 1
        y = project_spectrahedron(x + p)
        p = x + p - y
        x = project_affine(y)
        res = residual(y)
        if res < best_res:
            best, best_res = y, res
    corrected = _face_correction(u, best, family)
    res = residual(corrected)
    if res < best_res:
        best, best_res = corrected, res
    return FeasibilityResult(best, best_res, sweeps)


def solve_nu(u, options: SolverOptions | None = None) -> SolveResult:
    """Bracket ``nu`` for ``(P_U, P_1)`` between a primal state and dual phases."""
    opts = options or SolverOptions()
    u = _unitary(u)
    d = u.shape[0]
    rng = np.random.default_rng(opts.seed)
    result = SolveResult(None, False, 0)

    if d == 1:
        rho = np.ones((1, 1), dtype=np.complex128)
        cert = CertificatePair(rho, 1.0, np.array([-np.angle(u[0, 0])]), 1.0, 0.0)
        result.certificate, result.converged = cert, True
        return result

    budget = opts.max_iter
    rho, used = _frank_wolfe(u, opts, result, min(opts.fw_iters, budget))
    budget -= used
    iterations = used

    def bracket(r, phases=None):
        z = diag_overlaps(u, r)
        ph = aligned_phases(z) if phases is None else phases
        return float(np.abs(z).sum()), ph, dual_value(u, ph)

    p_val, phases, d_val = bracket(rho)
    if p_val - d_val > opts.gap and budget > 0:
        rho_pol, used = _polish(u, rho, opts, result, budget, iterations)
        budget -= used
        iterations += used
        p2, ph2, d2 = bracket(rho_pol)
        if p2 < p_val:
            rho, p_val = rho_pol, p2
        if d2 > d_val:
            phases, d_val = ph2, d2

    if p_val - d_val > 1e-12:
        ph, val = refine_dual(u, phases, opts.restarts, rng)
        if val > d_val:
            phases, d_val = ph, val
        result.history.append((iterations, "dual-ascent", p_val, d_val))

    if p_val - d_val > opts.gap and d_val <= opts.gap:
        feas = polish_feasible(u, rho, max_sweeps=opts.dykstra_sweeps)
        if feas.residual < p_val:
            rho, p_val = feas.state, feas.residual
        result.history.append((iterations, "feasibility", p_val, d_val))

    gap = p_val - d_val
    result.certificate = CertificatePair(rho, p_val, np.mod(phases, 2 * np.pi), d_val, gap)
    result.converged = bool(gap <= opts.gap)
    result.iterations = iterations
    return result
