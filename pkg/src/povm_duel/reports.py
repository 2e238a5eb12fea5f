"""Machine-readable reports and their independent re-check.

Every report embeds the input matrices, so ``verify_report`` can recompute
each certificate from the stored witnesses using plain linear algebra; it
never calls the solver.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from . import linalg as la
from .classical import classical_bound_projective, classical_objective
from .entangled import (
    CERTIFIED_IMPERFECT,
    CERTIFIED_PERFECT,
    IMPERFECT_TOL,
    INCONCLUSIVE,
    choi_distance_at_state,
    diamond_distance,
    evaluate_distance_at_state,
    nu_to_diamond,
    perfect_check,
    sandwich_bounds,
    trace_tests,
)
from .errors import MatrixFileError
from .io import REPORT_FORMAT, FORMAT_VERSION, complex_array, digest
from .objects import VonNeumannMeasurement
from .protocol import build_protocol, simulate
from .solver import FEASIBILITY_TOL, SolverOptions, dual_value, primal_value

VALUE_TOL = 1e-10
CLOSED_FORM_TOL = 1e-6


def _input_block(u, v):
    block = {"U": {"digest": digest(u), "entries": np.asarray(u, dtype=np.complex128)}}
    if v is not None:
        block["V"] = {"digest": digest(v), "entries": np.asarray(v, dtype=np.complex128)}
    else:
        block["V"] = None
    return block


def _header(command, u, v, options=None):
    doc = {
        "format": REPORT_FORMAT,
        "version": FORMAT_VERSION,
        "tool_version": __version__,
        "command": command,
        "inputs": _input_block(u, v),
    }
    if options is not None:
        doc["options"] = options.as_dict()
    return doc


def distance_result(rep) -> dict:
    cert = rep.certificate
    return {
        "nu": rep.nu,
        "diamond": rep.diamond,
        "diamond_upper": rep.diamond_upper,
        "success_probability": rep.success_probability,
        "status": rep.status,
        "converged": rep.converged,
        "iterations": rep.iterations,
        "discriminator_rank": rep.discriminator_rank,
        "ancilla_dimension": rep.ancilla_dimension,
        "conventions": {
            "discriminator": "state rho in ||(1 (x) sqrt(rho)) J(P_V - P_U) (1 (x) sqrt(rho))||_1",
            "program_state": "transpose of discriminator; closed form and purification use it",
            "certificate": "computed for W = V^dagger U against the computational basis",
        },
        "discriminator": rep.discriminator,
        "program_state": rep.program_state,
        "purification": rep.purification.as_matrix(),
        "certificate": {
            "primal_state": cert.primal_state,
            "primal_value": cert.primal_value,
            "dual_phases": cert.dual_phases,
            "dual_value": cert.dual_value,
            "gap": cert.gap,
        },
    }


def distance_report(u, v=None, options: SolverOptions | None = None) -> tuple[dict, object]:
    options = options or SolverOptions()
    rep = diamond_distance(u, v, options)
    doc = _header("distance", u, v, options)
    res = distance_result(rep)
    lower, upper = sandwich_bounds(u, v)
    res["sandwich"] = {"lower": lower, "upper": upper}
    doc["result"] = res
    return doc, rep


def perfect_report(u, options: SolverOptions | None = None) -> tuple[dict, object]:
    options = options or SolverOptions()
    pc = perfect_check(u, options)
    doc = _header("perfect", u, None, options)
    doc["result"] = {
        "status": pc.status,
        "residual": pc.residual,
        "dual_value": pc.dual_value,
        "witness_state": pc.witness_state if pc.status != CERTIFIED_IMPERFECT else None,
        "witness_phases": pc.witness_phases,
    }
    return doc, pc


def trace_report(u) -> tuple[dict, object]:
    tt = trace_tests(u)
    doc = _header("tracecheck", u, None)
    doc["result"] = {
        "trace_value": tt.trace_value,
        "necessary_violated": tt.necessary_violated,
        "sufficient_met": tt.sufficient_met,
        "d3_verdict": tt.d3_verdict,
        "phases": tt.phases,
    }
    return doc, tt


def classical_report(u, v=None, threads=None) -> tuple[dict, object]:
    res = classical_bound_projective(u, v, threads=threads)
    doc = _header("classical", u, v)
    doc["result"] = {
        "best_subset": list(res.best_subset),
        "best_value": res.best_value,
        "probability_bound": res.probability_bound,
        "optimal_state": res.optimal_state,
    }
    return doc, res


def simulate_report(u, v=None, trials=100000, seed=0, options: SolverOptions | None = None):
    options = options or SolverOptions()
    rep = diamond_distance(u, v, options)
    proto = build_protocol(u, v, rep.discriminator)
    run = simulate(proto, trials, seed)
    doc = _header("simulate", u, v, options)
    doc["result"] = {
        "trials": run.trials,
        "seed": run.seed,
        "empirical_success": run.empirical_success,
        "theoretical_success": run.theoretical_success,
        "standard_error": run.standard_error,
        "deviation": run.deviation,
        "within_three_sigma": run.within_three_sigma,
        "diamond": rep.diamond,
        "discriminator": rep.discriminator,
        "transcript_digest": "sha256:" + hashlib.sha256(run.transcript_bytes()).hexdigest(),
    }
    return doc, run


# ---------------------------------------------------------------- verify


@dataclass
class VerifyResult:
    checks: list = field(default_factory=list)  # (name, ok, detail)

    @property
    def ok(self) -> bool:
        return all(c[1] for c in self.checks)

    def add(self, name, ok, detail=""):
        self.checks.append((name, bool(ok), detail))


def _get(doc, *keys):
    cur = doc
    path = []
    for k in keys:
        path.append(str(k))
        if not isinstance(cur, dict) or k not in cur:
            raise MatrixFileError("missing field", ".".join(path))
        cur = cur[k]
    return cur


def _inputs(doc, res: VerifyResult):
    mats = []
    for name in ("U", "V"):
        block = _get(doc, "inputs")[name] if name in _get(doc, "inputs") else None
        if block is None:
            mats.append(None)
            continue
        m = complex_array(block["entries"], f"inputs.{name}.entries")
        res.add(f"digest {name}", digest(m) == block["digest"], block["digest"])
        res.add(f"unitary {name}", la.is_unitary(m), "")
        mats.append(m)
    return mats[0], mats[1]


def _is_state(m, tol=1e-8) -> bool:
    if not la.is_hermitian(m, tol):
        return False
    h = 0.5 * (m + la.dagger(m))
    return bool(np.linalg.eigvalsh(h)[0] >= -tol and abs(np.trace(h).real - 1.0) <= tol)


def _close(a, b, tol):
    return abs(float(a) - float(b)) <= tol


def _verify_distance(doc, u, v, res: VerifyResult):
    r = _get(doc, "result")
    c = r["certificate"]
    vv = np.eye(u.shape[0]) if v is None else v
    w = la.dagger(vv) @ u
    rho = complex_array(c["primal_state"], "result.certificate.primal_state")
    phases = np.asarray(c["dual_phases"], dtype=float)
    p = primal_value(w, rho)
    dv = dual_value(w, phases)
    res.add("primal state is a density matrix", _is_state(rho))
    res.add("primal value re-evaluates", _close(p, c["primal_value"], VALUE_TOL), f"{p!r}")
    res.add("dual value re-evaluates", _close(dv, c["dual_value"], VALUE_TOL), f"{dv!r}")
    res.add("weak duality", dv <= p + 1e-12, f"{dv!r} <= {p!r}")
    res.add("gap consistent", _close(c["gap"], c["primal_value"] - c["dual_value"], 1e-12))
    gap_target = float(doc.get("options", {}).get("gap", 1e-6))
    res.add("converged flag", bool(r["converged"]) == bool(c["gap"] <= gap_target))
    res.add("nu equals primal value", _close(r["nu"], c["primal_value"], 0.0))
    res.add("diamond from nu", _close(r["diamond"], nu_to_diamond(r["nu"]), 1e-12))
    res.add("diamond upper from dual", _close(r["diamond_upper"], nu_to_diamond(c["dual_value"]), 1e-12))
    res.add("success probability", _close(r["success_probability"], 0.5 + r["diamond"] / 4.0, 1e-15))

    disc = complex_array(r["discriminator"], "result.discriminator")
    prog = complex_array(r["program_state"], "result.program_state")
    res.add("discriminator is a density matrix", _is_state(disc))
    res.add("program state is the transpose", np.allclose(prog, disc.T, atol=1e-15, rtol=0))
    closed = evaluate_distance_at_state(u, disc, v)
    choi = choi_distance_at_state(u, disc, v)
    res.add("closed form at discriminator", _close(closed, r["diamond"], CLOSED_FORM_TOL), f"{closed!r}")
    res.add("Choi formula agrees with closed form", _close(closed, choi, 1e-8), f"{choi!r}")

    psi = complex_array(r["purification"], "result.purification")
    res.add("purification reduces to program state", np.allclose(psi @ la.dagger(psi), prog, atol=1e-9, rtol=0))
    rank = int(np.sum(np.linalg.eigvalsh(0.5 * (prog + la.dagger(prog))) > 1e-10))
    res.add("ancilla dimension", r["ancilla_dimension"] == psi.shape[1] == r["discriminator_rank"] == rank)

    status = r["status"]
    if status == CERTIFIED_PERFECT:
        ok = p <= FEASIBILITY_TOL
    elif status == CERTIFIED_IMPERFECT:
        ok = dv >= IMPERFECT_TOL
    else:
        ok = status == INCONCLUSIVE and p > FEASIBILITY_TOL and dv < IMPERFECT_TOL
    res.add(f"status {status}", ok)

    if "sandwich" in r:
        lo, hi = sandwich_bounds(u, v)
        res.add("sandwich values", _close(lo, r["sandwich"]["lower"], 1e-10) and _close(hi, r["sandwich"]["upper"], 1e-10))
        res.add("sandwich bounds hold", lo <= r["diamond"] + 1e-7 and r["diamond"] <= hi + 1e-7, f"{lo!r} {hi!r}")


def _verify_perfect(doc, u, res: VerifyResult):
    r = _get(doc, "result")
    status = r["status"]
    if status == CERTIFIED_PERFECT:
        rho = complex_array(r["witness_state"], "result.witness_state")
        p = primal_value(u, rho)
        res.add("witness is a density matrix", _is_state(rho))
        res.add("witness residual", p <= FEASIBILITY_TOL and _close(p, r["residual"], VALUE_TOL), f"{p!r}")
    elif status == CERTIFIED_IMPERFECT:
        dv = dual_value(u, np.asarray(r["witness_phases"], dtype=float))
        res.add("separating phases", dv >= IMPERFECT_TOL and _close(dv, r["dual_value"], VALUE_TOL), f"{dv!r}")
    else:
        res.add("inconclusive band", r["residual"] > FEASIBILITY_TOL and r["dual_value"] < IMPERFECT_TOL)


def _verify_trace(doc, u, res: VerifyResult):
    r = _get(doc, "result")
    tt = trace_tests(u)
    res.add("trace value", _close(tt.trace_value, r["trace_value"], 1e-12), f"{tt.trace_value!r}")
    res.add("verdicts", (tt.necessary_violated, tt.sufficient_met, tt.d3_verdict)
            == (r["necessary_violated"], r["sufficient_met"], r["d3_verdict"]))
    e = np.exp(1j * np.asarray(r["phases"], dtype=float))
    diag = np.diagonal(u * e[None, :])
    res.add("phases make the diagonal non-negative", np.all(np.abs(diag.imag) <= 1e-12) and np.all(diag.real >= -1e-12))


def _verify_classical(doc, u, v, res: VerifyResult):
    r = _get(doc, "result")
    vv = np.eye(u.shape[0]) if v is None else v
    w = la.dagger(vv) @ u
    sub = list(r["best_subset"])
    smin = la.svd_values(w[np.ix_(sub, sub)])[-1] if sub else 1.0
    value = float(np.sqrt(max(0.0, 1.0 - smin * smin)))
    res.add("subset value", _close(value, r["best_value"], 1e-10), f"{value!r}")
    res.add("probability bound", _close(r["probability_bound"], 0.5 + 0.5 * r["best_value"], 1e-15))
    psi = complex_array(r["optimal_state"], "result.optimal_state")
    tv = classical_objective(VonNeumannMeasurement(u), VonNeumannMeasurement(vv), psi)
    res.add("optimal state attains the bound", _close(tv, 2.0 * r["best_value"], 1e-9), f"{tv!r}")


def _verify_simulate(doc, u, v, res: VerifyResult):
    r = _get(doc, "result")
    disc = complex_array(r["discriminator"], "result.discriminator")
    proto = build_protocol(u, v, disc)
    res.add("theoretical success", _close(proto.theoretical_success, r["theoretical_success"], 1e-12))
    res.add("Helstrom value matches diamond", _close(proto.theoretical_success, 0.5 + r["diamond"] / 4.0, CLOSED_FORM_TOL))
    run = simulate(proto, int(r["trials"]), int(r["seed"]))
    dig = "sha256:" + hashlib.sha256(run.transcript_bytes()).hexdigest()
    res.add("transcript reproduces", dig == r["transcript_digest"])
    res.add("empirical success", run.empirical_success == r["empirical_success"])


def verify_report(doc) -> VerifyResult:
    res = VerifyResult()
    if not isinstance(doc, dict) or doc.get("format") != REPORT_FORMAT:
        raise MatrixFileError("not a report file", "format")
    command = _get(doc, "command")
    u, v = _inputs(doc, res)
    if command == "distance":
        _verify_distance(doc, u, v, res)
    elif command == "perfect":
        _verify_perfect(doc, u, res)
    elif command == "tracecheck":
        _verify_trace(doc, u, res)
    elif command == "classical":
        _verify_classical(doc, u, v, res)
    elif command == "simulate":
        _verify_simulate(doc, u, v, res)
    else:
        raise MatrixFileError(f"unknown command {command!r}", "command")
    return res
