"""Entanglement-assisted discrimination of von Neumann measurements.

Conventions
-----------
Two states appear in a report and they differ by a transpose.

* ``program_state`` (sigma) is the minimiser of ``sum_i |<v_i|sigma|u_i>|``.
  The closed form
  ``sum_i sqrt((<v_i|s|v_i> + <u_i|s|u_i>)^2 - 4 |<v_i|s|u_i>|^2)`` is
  evaluated at it, and the optimal input ``|psi_AB>`` is its purification.
* ``discriminator`` is ``sigma^T``, the state ``rho`` maximising
  ``||(1 (x) sqrt(rho)) J(P_V - P_U) (1 (x) sqrt(rho))||_1`` for Choi
  matrices ordered (output) (x) (input).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import schur

from . import linalg as la
from .errors import ShapeError, ToleranceError
from .geometry import dist_zero_to_hull, numerical_range_test
from .objects import VonNeumannMeasurement, choi_of_measurement, purify
from .solver import (
    FEASIBILITY_TOL,
    CertificatePair,
    SolverOptions,
    SolveResult,
    diag_overlaps,
    dual_value,
    polish_feasible,
    primal_value,
    solve_nu,
)

IMPERFECT_TOL = 1e-7
REFUTE_TOL = 1e-9
# feasibility polish runs below this residual even when already certifiable
POLISH_TARGET = 1e-12

CERTIFIED_PERFECT = "certified-perfect"
CERTIFIED_IMPERFECT = "certified-imperfect"
INCONCLUSIVE = "inconclusive"


def _unitary(u) -> np.ndarray:
    if isinstance(u, VonNeumannMeasurement):
        return u.unitary
    return VonNeumannMeasurement(u).unitary


def _pair(u, v):
    uu = _unitary(u)
    vv = np.eye(uu.shape[0], dtype=np.complex128) if v is None else _unitary(v)
    if uu.shape != vv.shape:
        raise ShapeError(f"measurements act on dimensions {uu.shape[0]} and {vv.shape[0]}")
    return uu, vv


def reduce_pair(u, v=None) -> np.ndarray:
    """``V^dagger U``; distances of ``(P_U, P_V)`` equal those of ``(P_{V^dagger U}, P_1)``."""
    uu, vv = _pair(u, v)
    return la.dagger(vv) @ uu


def nu_to_diamond(nu: float) -> float:
    nu = min(1.0, max(0.0, float(nu)))
    return float(2.0 * np.sqrt(max(0.0, 1.0 - nu * nu)))


def closed_form_value(u, sigma, v=None) -> float:
    """The closed-form distance at a program state ``sigma``.

    With ``a_i = sqrt(sigma) u_i`` and ``b_i = sqrt(sigma) v_i`` the radicand
    ``(|a|^2 + |b|^2)^2 - 4 |<b|a>|^2`` is rewritten as
    ``(|a|^2 - |b|^2)^2 + 4 ||a ^ b||^2`` so that no cancellation occurs.
    """
    uu, vv = _pair(u, v)
    s = np.asarray(sigma, dtype=np.complex128)
    if s.shape != uu.shape:
        raise ShapeError(f"state of dimension {s.shape[0]} for measurements on {uu.shape[0]}")
    r = la.matrix_sqrt_psd(s)
    a = r @ uu
    b = r @ vv
    pa = np.sum(np.abs(a) ** 2, axis=0)
    pb = np.sum(np.abs(b) ** 2, axis=0)
    # ||a ^ b||^2 = 1/2 sum_jk |a_j b_k - a_k b_j|^2
    wedge = np.einsum("ji,ki->ijk", a, b)
    wedge = 0.5 * np.sum(np.abs(wedge - wedge.transpose(0, 2, 1)) ** 2, axis=(1, 2))
    return float(np.sqrt((pa - pb) ** 2 + 4.0 * wedge).sum())


def evaluate_distance_at_state(u, rho, v=None) -> float:
    """Distance attained by feeding the discriminator ``rho`` (Choi convention).

    Uses the closed form at ``rho^T``; ``choi_distance_at_state`` computes the
    same number through the Choi matrix.
    """
    rho = np.asarray(rho, dtype=np.complex128)
    return closed_form_value(u, rho.T, v)


def choi_distance_at_state(u, rho, v=None) -> float:
    """``||(1 (x) sqrt(rho)) J(P_V - P_U) (1 (x) sqrt(rho))||_1``."""
    uu, vv = _pair(u, v)
    d = uu.shape[0]
    j = choi_of_measurement(VonNeumannMeasurement(vv)).matrix - choi_of_measurement(VonNeumannMeasurement(uu)).matrix
    r = la.matrix_sqrt_psd(np.asarray(rho, dtype=np.complex128))
    s = np.kron(np.eye(d), r)
    return la.trace_norm(s @ j @ s)


@dataclass(frozen=True)
class DiscriminationReport:
    """Outcome of ``diamond_distance``.

    ``diamond`` is computed from the primal value (a value attained by a
    state); ``diamond_upper`` from the dual value. ``discriminator`` is in
    Choi convention and ``program_state`` is its transpose; ``purification``
    purifies ``program_state`` and has ``ancilla_dimension`` columns.
    """

    nu: float
    diamond: float
    diamond_upper: float
    success_probability: float
    discriminator: np.ndarray
    program_state: np.ndarray
    discriminator_rank: int
    ancilla_dimension: int
    purification: object
    certificate: CertificatePair
    status: str
    converged: bool
    iterations: int
    reduced_unitary: np.ndarray = field(repr=False)
    history: list = field(default_factory=list, repr=False)

    @property
    def perfect(self) -> bool:
        return self.status == CERTIFIED_PERFECT


def _status(cert: CertificatePair) -> str:
    if cert.primal_value <= FEASIBILITY_TOL:
        return CERTIFIED_PERFECT
    if cert.dual_value >= IMPERFECT_TOL:
        return CERTIFIED_IMPERFECT
    return INCONCLUSIVE


def _arc_projectors(w, phases):
    """Eigenprojectors of ``W E`` bounding the largest eigenphase gap.

    Among equally large gaps the pair with the smallest ``|lam_1 + lam_d|``
    is taken.
    """
    a = w * np.exp(1j * np.asarray(phases))[None, :]
    t, z = schur(a, output="complex")
    lam = np.diagonal(t).copy()
    theta = np.mod(np.angle(lam), 2 * np.pi)
    # group numerically equal eigenphases
    order = np.argsort(theta)
    groups = []
    for k in order:
        if groups and abs(theta[k] - theta[groups[-1][0]]) <= 1e-9:
            groups[-1].append(k)
        else:
            groups.append([k])
    if len(groups) > 1 and abs(theta[groups[0][0]] + 2 * np.pi - theta[groups[-1][0]]) <= 1e-9:
        groups[0] = groups.pop() + groups[0]
    if len(groups) < 2:
        return None
    n = len(groups)
    reps = [theta[g[0]] for g in groups]
    gaps = [np.mod(reps[(k + 1) % n] - reps[k], 2 * np.pi) for k in range(n)]
    gmax = max(gaps)
    cands = [k for k in range(n) if gaps[k] >= gmax - 1e-9]
    k = min(cands, key=lambda k: abs(lam[groups[k][0]] + lam[groups[(k + 1) % n][0]]))
    g1, g2 = groups[k], groups[(k + 1) % n]
    p1 = z[:, g1] @ la.dagger(z[:, g1])
    p2 = z[:, g2] @ la.dagger(z[:, g2])
    return p1, p2, lam[g1[0]], lam[g2[0]]


def _normalized(m):
    m = 0.5 * (m + la.dagger(m))
    return m / np.trace(m).real


def _best_program_state(w, cert: CertificatePair):
    """Minimiser-derived state attaining the closed form; the optimal primal state
    is restricted to the two extreme eigenspaces of ``W E_0`` when that helps."""
    rho = cert.primal_state
    best, best_val = rho, closed_form_value(w, rho)
    arc = _arc_projectors(w, cert.dual_phases) if cert.dual_value > 0 else None
    if arc is not None:
        p1, p2, _, _ = arc
        tau = p1 @ rho @ p1 + p2 @ rho @ p2
        if np.trace(tau).real > 1e-12:
            tau = _normalized(tau)
            val = closed_form_value(w, tau)
            if val > best_val:
                best, best_val = tau, val
    return best


def diamond_distance(u, v=None, options: SolverOptions | None = None) -> DiscriminationReport:
    uu, vv = _pair(u, v)
    w = la.dagger(vv) @ uu
    res: SolveResult = solve_nu(w, options)
    cert = res.certificate
    status = _status(cert)
    if cert.dual_value < IMPERFECT_TOL and cert.primal_value > POLISH_TARGET:
        feas = polish_feasible(w, cert.primal_state,
                               max_sweeps=(options or SolverOptions()).dykstra_sweeps)
        if feas.residual < cert.primal_value:
            cert = CertificatePair(feas.state, feas.residual, cert.dual_phases, cert.dual_value,
                                   feas.residual - cert.dual_value)
            status = _status(cert)

    nu = cert.primal_value
    diamond = nu_to_diamond(nu)
    rho_w = _best_program_state(w, cert)
    sigma = vv @ rho_w @ la.dagger(vv)
    sigma = 0.5 * (sigma + la.dagger(sigma))
    pur = purify(_normalized(sigma))
    discriminator = sigma.T.copy()
    return DiscriminationReport(
        nu=float(nu),
        diamond=diamond,
        diamond_upper=nu_to_diamond(cert.dual_value),
        success_probability=0.5 + diamond / 4.0,
        discriminator=discriminator,
        program_state=sigma,
        discriminator_rank=pur.schmidt_rank,
        ancilla_dimension=pur.schmidt_rank,
        purification=pur,
        certificate=cert,
        status=status,
        converged=res.converged,
        iterations=res.iterations,
        reduced_unitary=w,
        history=res.history,
    )


@dataclass(frozen=True)
class PerfectCheck:
    status: str
    witness_state: np.ndarray | None
    witness_phases: np.ndarray | None
    residual: float
    dual_value: float

    @property
    def perfect(self) -> bool:
        return self.status == CERTIFIED_PERFECT


def perfect_check(u, options: SolverOptions | None = None) -> PerfectCheck:
    """Three-way verdict on whether ``P_U`` and ``P_1`` are perfectly distinguishable.

    A perfect verdict carries a state with ``||diag(U^dagger rho)||_1 <= 1e-9``;
    an imperfect one carries phases ``E`` with hull distance of ``U E`` at
    least ``1e-7``.
    """
    w = _unitary(u)
    opts = options or SolverOptions()
    cert = solve_nu(w, opts).certificate
    if cert.dual_value >= IMPERFECT_TOL:
        return PerfectCheck(CERTIFIED_IMPERFECT, None, cert.dual_phases, cert.primal_value, cert.dual_value)
    rho, res = cert.primal_state, cert.primal_value
    if res > POLISH_TARGET:
        feas = polish_feasible(w, rho, max_sweeps=opts.dykstra_sweeps)
        if feas.residual < res:
            rho, res = feas.state, feas.residual
    if res <= FEASIBILITY_TOL:
        return PerfectCheck(CERTIFIED_PERFECT, rho, None, res, cert.dual_value)
    return PerfectCheck(INCONCLUSIVE, rho, cert.dual_phases, res, cert.dual_value)


@dataclass(frozen=True)
class TraceTests:
    trace_value: float
    necessary_violated: bool
    sufficient_met: bool
    d3_verdict: bool | None  # True: perfect, False: not perfect, None: d != 3
    phases: np.ndarray


TRACE_TOL = 1e-12


def trace_tests(u) -> TraceTests:
    """Trace conditions on ``Tr(U E)`` with ``E`` making the diagonal of ``U E`` non-negative.

    ``necessary_violated`` rules perfection out; ``sufficient_met`` (odd
    ``d >= 3``) establishes it; for ``d = 3`` the threshold 1 is exact.
    """
    w = _unitary(u)
    d = w.shape[0]
    diag = np.diagonal(w)
    phases = np.where(np.abs(diag) > 1e-12, -np.angle(diag), 0.0)
    value = float(np.abs(diag).sum())
    necessary_violated = value > d - 2 + TRACE_TOL
    sufficient_met = d >= 3 and d % 2 == 1 and value <= 1.0 + TRACE_TOL
    d3 = bool(value <= 1.0 + TRACE_TOL) if d == 3 else None
    return TraceTests(value, bool(necessary_violated), bool(sufficient_met), d3, phases)


@dataclass(frozen=True)
class Refutation:
    diagonal: np.ndarray
    min_eigenvalue: float
    max_eigenvalue: float
    source: str


def _hermitian_part(w, dvec):
    m = w * dvec[None, :]
    return m + la.dagger(m)


def refute_perfect_by_numerical_range(u, trials: int = 200, seed: int = 0, guide=None) -> Refutation | None:
    """Search for a diagonal ``D`` with ``U D + D^dagger U^dagger`` definite.

    Such a ``D`` proves that ``P_U`` and ``P_1`` are not perfectly
    distinguishable. ``guide`` may be dual phases (for example
    ``CertificatePair.dual_phases``): the hull point of ``U E`` nearest the
    origin then fixes a rotation making the Hermitian part positive. Returns
    ``None`` when nothing is found, which proves nothing.
    """
    w = _unitary(u)
    d = w.shape[0]
    rng = np.random.default_rng(seed)
    candidates = []
    if guide is not None:
        e = np.exp(1j * np.asarray(guide, dtype=float))
        hd = dist_zero_to_hull(w * e[None, :])
        p = hd.witness_point()
        if abs(p) > 0:
            candidates.append(("guide", e * np.conj(p) / abs(p)))
    candidates.append(("identity", np.ones(d, dtype=np.complex128)))
    for i in range(d):
        x = np.zeros(d, dtype=np.complex128)
        x[i] = 1.0
        candidates.append((f"basis-re[{i}]", x))
        candidates.append((f"basis-im[{i}]", 1j * x))
    for t in range(trials):
        candidates.append((f"random[{t}]", (rng.standard_normal(d) + 1j * rng.standard_normal(d)) / np.sqrt(2)))
    for source, dvec in candidates:
        lam = np.linalg.eigvalsh(_hermitian_part(w, dvec))
        if lam[0] > REFUTE_TOL or lam[-1] < -REFUTE_TOL:
            return Refutation(dvec, float(lam[0]), float(lam[-1]), source)
    return None


def numerical_range_verdict(u, dvec):
    """Membership of 0 in ``W(U D)`` for a given diagonal."""
    w = _unitary(u)
    return numerical_range_test(w * np.asarray(dvec)[None, :])


def sandwich_bounds(u, v=None) -> tuple[float, float]:
    """``(||J||_1 / d, ||Tr_out |J| ||_inf)`` for ``J = J(P_U) - J(P_V)``."""
    uu, vv = _pair(u, v)
    d = uu.shape[0]
    j = choi_of_measurement(VonNeumannMeasurement(uu)).matrix - choi_of_measurement(VonNeumannMeasurement(vv)).matrix
    j = 0.5 * (j + la.dagger(j))
    lam, vecs = np.linalg.eigh(j)
    lower = float(np.abs(lam).sum()) / d
    absj = (vecs * np.abs(lam)) @ la.dagger(vecs)
    upper = la.operator_norm(la.partial_trace_first(absj, (d, d)))
    return lower, upper


@dataclass(frozen=True)
class SaddleDiagnostic:
    degenerate: bool
    residual: float
    trace_first: float
    trace_last: float
    eigenvalue_first: complex | None
    eigenvalue_last: complex | None


def saddle_structure_diagnostic(cert: CertificatePair, u, max_gap=1e-6) -> SaddleDiagnostic:
    """Compare ``diag`` of the primal state restricted to the two extreme
    eigenspaces of ``U E_0``. Near zero at a converged saddle, with both
    restricted traces near 1/2."""
    w = _unitary(u)
    if cert.gap > max_gap:
        raise ToleranceError(f"certificate gap {cert.gap:.3e} exceeds {max_gap:.1e}")
    arc = _arc_projectors(w, cert.dual_phases)
    if arc is None:
        return SaddleDiagnostic(True, 0.0, 1.0, 1.0, None, None)
    p1, p2, l1, l2 = arc
    rho = cert.primal_state
    r1 = p1 @ rho @ p1
    r2 = p2 @ rho @ p2
    resid = float(np.abs(np.diagonal(r1) - np.diagonal(r2)).sum())
    return SaddleDiagnostic(False, resid, float(np.trace(r1).real), float(np.trace(r2).real), complex(l1), complex(l2))


def recheck_certificate(u, state, phases, v=None) -> tuple[float, float]:
    """Primal and dual values recomputed from the witnesses alone."""
    w = reduce_pair(u, v)
    return primal_value(w, state), dual_value(w, phases)


__all__ = [
    "CERTIFIED_IMPERFECT",
    "CERTIFIED_PERFECT",
    "INCONCLUSIVE",
    "DiscriminationReport",
    "PerfectCheck",
    "Refutation",
    "SaddleDiagnostic",
    "TraceTests",
    "choi_distance_at_state",
    "closed_form_value",
    "diag_overlaps",
    "diamond_distance",
    "evaluate_distance_at_state",
    "nu_to_diamond",
    "perfect_check",
    "recheck_certificate",
    "reduce_pair",
    "refute_perfect_by_numerical_range",
    "sandwich_bounds",
    "saddle_structure_diagnostic",
    "trace_tests",
]
