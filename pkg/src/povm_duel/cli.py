"""``povm-duel`` command line.

Exit codes: 0 success, 1 certified negative answer (or a failed ``verify``),
2 input error, 3 inconclusive.
"""
from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from .entangled import CERTIFIED_IMPERFECT, CERTIFIED_PERFECT
from .errors import PovmDuelError
from .io import dumps, matrix_document, parse_matrix, parse_vector, read_json, vector_document, write_text
from .objects import VonNeumannMeasurement
from .reports import (
    classical_report,
    distance_report,
    perfect_report,
    simulate_report,
    trace_report,
    verify_report,
)
from .solver import SolverOptions, default_gap
from .special import ReflectionSpec, fourier_matrix, reflection_matrix

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_INPUT = 2
EXIT_INCONCLUSIVE = 3


def _emit(text: str, output):
    if output:
        write_text(output, text)
    else:
        sys.stdout.write(text)


def _measurement(path) -> np.ndarray:
    return VonNeumannMeasurement(parse_matrix(path)).unitary


def _pair(args):
    u = _measurement(args.U)
    v = _measurement(args.V) if args.V else None
    return u, v


def _options(args) -> SolverOptions:
    return SolverOptions(gap=args.gap, max_iter=args.max_iter, seed=args.seed)


def _timed(fn, *a, **k):
    t0 = time.perf_counter()
    doc, obj = fn(*a, **k)
    doc["wall_time_seconds"] = time.perf_counter() - t0
    return doc, obj


def cmd_gen(args) -> int:
    if args.family == "fourier":
        m = fourier_matrix(args.dim).unitary
        meta = {"name": f"F_{args.dim}", "generator": "fourier", "params": {"dim": args.dim}}
    else:
        if args.axis:
            spec = ReflectionSpec(parse_vector(args.axis))
            params = {"axis_file": args.axis}
        elif args.uniform:
            spec = ReflectionSpec.uniform(args.uniform)
            params = {"uniform": args.uniform}
        else:
            spec = ReflectionSpec.with_omega(args.dim, args.omega)
            params = {"dim": args.dim, "omega": args.omega}
        m = reflection_matrix(spec).unitary
        params["omega"] = spec.omega
        meta = {"name": "reflection", "generator": "reflection", "params": params,
                "axis": vector_document(spec.axis)["entries"]}
    _emit(dumps(matrix_document(m, meta)), args.output)
    return EXIT_OK


def cmd_classical(args) -> int:
    u, v = _pair(args)
    doc, _ = _timed(classical_report, u, v, threads=args.threads)
    _emit(dumps(doc), args.output)
    return EXIT_OK


def cmd_distance(args) -> int:
    u, v = _pair(args)
    doc, rep = _timed(distance_report, u, v, _options(args))
    _emit(dumps(doc), args.output)
    return EXIT_OK if rep.converged else EXIT_INCONCLUSIVE


def cmd_perfect(args) -> int:
    u = _measurement(args.U)
    doc, pc = _timed(perfect_report, u, _options(args))
    _emit(dumps(doc), args.output)
    if args.witness:
        if pc.status == CERTIFIED_PERFECT:
            write_text(args.witness, dumps(matrix_document(pc.witness_state, {"name": "feasible state", "residual": pc.residual})))
        elif pc.witness_phases is not None:
            phases = np.exp(1j * np.asarray(pc.witness_phases))
            write_text(args.witness, dumps(vector_document(phases, {"name": "separating diagonal unitary",
                                                                    "hull_distance": pc.dual_value})))
    if pc.status == CERTIFIED_PERFECT:
        return EXIT_OK
    if pc.status == CERTIFIED_IMPERFECT:
        return EXIT_NEGATIVE
    return EXIT_INCONCLUSIVE


def cmd_tracecheck(args) -> int:
    u = _measurement(args.U)
    doc, _ = _timed(trace_report, u)
    _emit(dumps(doc), args.output)
    return EXIT_OK


def cmd_simulate(args) -> int:
    u, v = _pair(args)
    if args.trials < 1:
        raise PovmDuelError("--trials must be at least 1")
    doc, _ = _timed(simulate_report, u, v, args.trials, args.seed, _options(args))
    _emit(dumps(doc), args.output)
    return EXIT_OK


def cmd_verify(args) -> int:
    doc = read_json(args.report)
    res = verify_report(doc)
    for name, ok, detail in res.checks:
        line = f"{'ok  ' if ok else 'FAIL'} {name}"
        if detail and not ok:
            line += f"  ({detail})"
        print(line)
    print("verified" if res.ok else "verification failed")
    return EXIT_OK if res.ok else EXIT_NEGATIVE


def _solver_flags(p):
    p.add_argument("--gap", type=float, default=default_gap(), help="target certificate gap (env POVM_DUEL_GAP)")
    p.add_argument("--max-iter", type=int, default=20000)
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="povm-duel", description="Distinguishability of von Neumann measurements.")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write a matrix file")
    gsub = g.add_subparsers(dest="family", required=True)
    gf = gsub.add_parser("fourier")
    gf.add_argument("--dim", type=int, required=True)
    gf.add_argument("-o", "--output")
    gr = gsub.add_parser("reflection")
    src = gr.add_mutually_exclusive_group(required=True)
    src.add_argument("--axis", help="vector file with the reflection axis")
    src.add_argument("--uniform", type=int, metavar="D", help="uniform axis in dimension D")
    src.add_argument("--omega", type=float, help="largest |x_i|^2 (needs --dim)")
    gr.add_argument("--dim", type=int)
    gr.add_argument("-o", "--output")

    c = sub.add_parser("classical", help="entanglement-free bound")
    c.add_argument("U")
    c.add_argument("V", nargs="?")
    c.add_argument("--threads", type=int)
    c.add_argument("-o", "--output")

    d = sub.add_parser("distance", help="diamond distance with certificates")
    d.add_argument("U")
    d.add_argument("V", nargs="?")
    _solver_flags(d)
    d.add_argument("-o", "--output")

    pf = sub.add_parser("perfect", help="perfect-distinguishability verdict")
    pf.add_argument("U")
    _solver_flags(pf)
    pf.add_argument("-o", "--output")
    pf.add_argument("--witness", help="write the witness state or diagonal unitary here")

    t = sub.add_parser("tracecheck", help="trace conditions")
    t.add_argument("U")
    t.add_argument("-o", "--output")

    s = sub.add_parser("simulate", help="Monte-Carlo protocol run")
    s.add_argument("U")
    s.add_argument("V", nargs="?")
    s.add_argument("--trials", type=int, default=100000)
    _solver_flags(s)
    s.add_argument("-o", "--output")

    v = sub.add_parser("verify", help="re-check a report without solving")
    v.add_argument("report")
    return parser


COMMANDS = {
    "gen": cmd_gen,
    "classical": cmd_classical,
    "distance": cmd_distance,
    "perfect": cmd_perfect,
    "tracecheck": cmd_tracecheck,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    if args.command == "gen" and args.family == "reflection" and args.omega is not None and args.dim is None:
        print("error: --omega needs --dim", file=sys.stderr)
        return EXIT_INPUT
    try:
        return COMMANDS[args.command](args)
    except (PovmDuelError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
