"""Acceptance criteria 1-11.

Run with ``pytest tests/test_acceptance.py`` (or ``python tests/test_acceptance.py``);
the terminal summary prints one PASS/FAIL line per criterion.
"""
import json
import sys
import time

import numpy as np
import pytest

from povm_duel import cli, entangled, kernels, solver
from povm_duel.classical import classical_bound_projective
from povm_duel.entangled import (
    CERTIFIED_IMPERFECT,
    CERTIFIED_PERFECT,
    diamond_distance,
    evaluate_distance_at_state,
    perfect_check,
    sandwich_bounds,
    trace_tests,
)
from povm_duel.io import write_matrix
from povm_duel.linalg import haar_unitary
from povm_duel.protocol import build_protocol, simulate
from povm_duel.solver import primal_value, solve_nu
from povm_duel.special import (
    ReflectionSpec,
    fourier_discriminator,
    fourier_matrix,
    fourier_rank1_discriminator,
    reflection_diamond,
    reflection_matrix,
)

import oracles as O

# weak duality is exact in theory; iterates are O(1) floats
ROUNDOFF = 1e-12


def criterion(n, title):
    return pytest.mark.criterion(n, title)


def _diag_residual(u, x):
    return np.abs(np.diagonal(u.conj().T @ x)).max()


# ---------------------------------------------------------------- 1


@criterion(1, "Fourier perfection for d = 4..8")
@pytest.mark.parametrize("d", [4, 5, 6, 7, 8])
def test_c1_fourier_perfect(d):
    f = fourier_matrix(d)
    assert diamond_distance(f).diamond == pytest.approx(2.0, abs=1e-6)
    pc = perfect_check(f)
    assert pc.status == CERTIFIED_PERFECT
    assert pc.residual <= 1e-9
    x = fourier_discriminator(d)
    assert _diag_residual(f.unitary, x) <= 1e-10
    assert np.sum(np.linalg.eigvalsh(x) > 1e-10) <= 2


# ---------------------------------------------------------------- 2


@criterion(2, "Fourier imperfection for d = 2, 3")
@pytest.mark.parametrize("d", [2, 3])
def test_c2_small_fourier_imperfect(d):
    assert perfect_check(fourier_matrix(d)).status == CERTIFIED_IMPERFECT


@criterion(2, "Fourier imperfection for d = 2, 3")
def test_c2_trace_verdict_d3():
    tt = trace_tests(fourier_matrix(3))
    assert abs(tt.trace_value - O.F3_TRACE_VALUE) <= 1e-12
    assert tt.trace_value > 1
    assert tt.necessary_violated
    assert tt.d3_verdict is False


# ---------------------------------------------------------------- 3


@criterion(3, "entanglement needed at prime d; rank-one discriminators")
@pytest.mark.parametrize("d", [5, 7])
def test_c3_prime_dimensions(d):
    f = fourier_matrix(d)
    sig = kernels.principal_sigma_min(f.unitary)
    assert sig.size > 0 and np.all(sig > 1e-9)
    assert perfect_check(f).status == CERTIFIED_PERFECT


@criterion(3, "entanglement needed at prime d; rank-one discriminators")
@pytest.mark.parametrize("d,m,n", [(4, 2, 1), (8, 2, 2), (9, 3, 1)])
def test_c3_rank_one(d, m, n):
    x = fourier_rank1_discriminator(d, m, n)
    assert _diag_residual(fourier_matrix(d).unitary, x) <= 1e-10
    assert np.sum(np.linalg.eigvalsh(x) > 1e-10) == 1


# ---------------------------------------------------------------- 4


@criterion(4, "reflection closed form")
@pytest.mark.parametrize("d", [2, 3, 4])
@pytest.mark.parametrize("omega", [0.55, 0.65, 0.75, 0.85, 0.95])
def test_c4_reflection_vs_solver(d, omega):
    spec = ReflectionSpec.with_omega(d, omega, phases=0.7 * np.arange(d))
    closed = reflection_diamond(spec).diamond
    assert closed == pytest.approx(2 * np.sqrt(1 - 4 * (omega - 0.5) ** 2), abs=1e-12)
    assert diamond_distance(reflection_matrix(spec)).diamond == pytest.approx(closed, abs=1e-6)


@criterion(4, "reflection closed form")
@pytest.mark.parametrize("d,omega", [(2, 0.5), (3, 1 / 3), (3, 0.45), (4, 0.25), (4, 0.4), (4, 0.5)])
def test_c4_reflection_perfect(d, omega):
    spec = ReflectionSpec.with_omega(d, omega, phases=1.3 * np.arange(d))
    u = reflection_matrix(spec).unitary
    r = reflection_diamond(spec)
    rho = r.program_state
    assert np.trace(rho).real == pytest.approx(1.0, abs=1e-12)
    assert np.linalg.eigvalsh(rho)[0] >= -1e-12
    assert primal_value(u, rho) <= 1e-9
    assert r.diamond == pytest.approx(2.0, abs=1e-6)
    assert diamond_distance(u).diamond == pytest.approx(2.0, abs=1e-6)


# ---------------------------------------------------------------- 5


@criterion(5, "saddle duality on 100 Haar instances")
def test_c5_saddle_duality():
    rng = np.random.default_rng(5)
    t0 = time.perf_counter()
    worst_gap = 0.0
    for k in range(100):
        d = 2 + k % 5
        res = solve_nu(haar_unitary(d, rng))
        cert = res.certificate
        assert res.converged
        assert cert.dual_value <= cert.primal_value + ROUNDOFF
        assert res.history
        for it, stage, p, q in res.history:
            assert q <= p + ROUNDOFF, (k, it, stage, p, q)
        worst_gap = max(worst_gap, cert.gap)
    assert worst_gap <= 1e-6
    assert time.perf_counter() - t0 <= 600


# ---------------------------------------------------------------- 6


@criterion(6, "Hadamard benchmark")
def test_c6_hadamard():
    rep = diamond_distance(fourier_matrix(2))
    oracle_nu = O.nu_phase_grid_2x2(fourier_matrix(2).unitary)
    oracle_diamond = 2 * np.sqrt(1 - oracle_nu**2)
    assert oracle_diamond == pytest.approx(O.HADAMARD_DIAMOND, abs=1e-9)
    assert rep.diamond == pytest.approx(O.HADAMARD_DIAMOND, abs=1e-6)
    assert rep.success_probability == pytest.approx(O.HADAMARD_SUCCESS, abs=1e-6)
    assert rep.success_probability == pytest.approx(0.8535534, abs=1e-6)
    cl = classical_bound_projective(fourier_matrix(2))
    assert cl.probability_bound == pytest.approx(0.5 + np.sqrt(2) / 4, abs=1e-6)
    assert cl.probability_bound == pytest.approx(rep.success_probability, abs=1e-6)


# ---------------------------------------------------------------- 7


@criterion(7, "sandwich bounds on 100 instances")
def test_c7_sandwich():
    rng = np.random.default_rng(7)
    for k in range(100):
        d = 2 + k % 5
        u, v = haar_unitary(d, rng), haar_unitary(d, rng)
        lo, hi = sandwich_bounds(u, v)
        dia = diamond_distance(u, v).diamond
        assert lo <= dia + 1e-7, (k, lo, dia)
        assert dia <= hi + 1e-7, (k, dia, hi)


# ---------------------------------------------------------------- 8


@criterion(8, "closed form at the discriminator")
@pytest.mark.parametrize("seed", range(6))
def test_c8_closed_form(seed):
    rng = np.random.default_rng(800 + seed)
    d = 2 + seed % 4
    u, v = haar_unitary(d, rng), haar_unitary(d, rng)
    rep = diamond_distance(u, v)
    assert evaluate_distance_at_state(u, rep.discriminator, v) == pytest.approx(rep.diamond, abs=1e-6)
    for _ in range(50):
        rho = O.random_state(d, rng, rank=int(rng.integers(1, d + 1)))
        assert evaluate_distance_at_state(u, rho, v) <= rep.diamond + 1e-9


# ---------------------------------------------------------------- 9


@criterion(9, "protocol simulation")
def test_c9_hadamard_statistics():
    rep = diamond_distance(fourier_matrix(2))
    run = simulate(build_protocol(fourier_matrix(2), discriminator=rep.discriminator), 100_000, seed=0)
    assert abs(run.empirical_success - 0.8535534) <= 3 * run.standard_error


@criterion(9, "protocol simulation")
def test_c9_f4_perfect_and_reproducible():
    rep = diamond_distance(fourier_matrix(4))
    proto = build_protocol(fourier_matrix(4), discriminator=rep.discriminator)
    a = simulate(proto, 10_000, seed=42)
    b = simulate(proto, 10_000, seed=42)
    assert a.empirical_success == 1.0
    assert a.transcript_bytes() == b.transcript_bytes()


# ---------------------------------------------------------------- 10


def _instances(seed, n=20):
    rng = np.random.default_rng(seed)
    for k in range(n):
        d = 2 + k % 4
        yield d, haar_unitary(d, rng), haar_unitary(d, rng), rng


def _phases(d, rng):
    return np.diag(np.exp(2j * np.pi * rng.random(d)))


def _perm(d, rng):
    return np.eye(d)[rng.permutation(d)]


TRANSFORMS = {
    "right diagonal phases": lambda u, v, d, rng: (u @ _phases(d, rng), v),
    "global phase": lambda u, v, d, rng: (np.exp(2j * np.pi * rng.random()) * u, v),
    "joint relabelling": lambda u, v, d, rng: (lambda p: (u @ p, v @ p))(_perm(d, rng)),
    "joint left permutation": lambda u, v, d, rng: (lambda p: (p @ u, p @ v))(_perm(d, rng)),
    "joint left unitary": lambda u, v, d, rng: (lambda w: (w @ u, w @ v))(haar_unitary(d, rng)),
}


@criterion(10, "invariance suite")
@pytest.mark.parametrize("k,name", list(enumerate(TRANSFORMS)))
def test_c10_invariance(k, name):
    for d, u, v, rng in _instances(1000 + k):
        base = diamond_distance(u, v).diamond
        u2, v2 = TRANSFORMS[name](u, v, d, rng)
        assert diamond_distance(u2, v2).diamond == pytest.approx(base, abs=1e-6), name


# ---------------------------------------------------------------- 11


@pytest.fixture(scope="module")
def fixture_reports(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("reports")
    mats = {f"f{d}": fourier_matrix(d).unitary for d in range(2, 9)}
    mats["refl"] = reflection_matrix(ReflectionSpec.with_omega(3, 0.75)).unitary
    rng = np.random.default_rng(11)
    mats["u"], mats["v"] = haar_unitary(4, rng), haar_unitary(4, rng)
    paths = {}
    for name, m in mats.items():
        paths[name] = tmp / f"{name}.json"
        write_matrix(paths[name], m)
    runs = [["distance", paths[f"f{d}"]] for d in range(2, 9)]
    runs += [["perfect", paths[f"f{d}"]] for d in range(2, 9)]
    runs += [["tracecheck", paths["f3"]], ["distance", paths["refl"]],
             ["distance", paths["u"], paths["v"]], ["classical", paths["f2"]],
             ["classical", paths["u"], paths["v"]],
             ["simulate", paths["f2"], "--trials", "100000"], ["simulate", paths["f4"], "--trials", "10000"]]
    out = []
    for k, argv in enumerate(runs):
        target = tmp / f"report{k}.json"
        code = cli.main([str(a) for a in argv] + ["-o", str(target)])
        assert code in (0, 1), argv
        out.append(target)
    return out


@criterion(11, "verify re-checks every report without solving")
def test_c11_verify(fixture_reports, monkeypatch, capsys):
    def forbidden(*a, **k):
        raise AssertionError("solver called during verify")

    monkeypatch.setattr(solver, "solve_nu", forbidden)
    monkeypatch.setattr(entangled, "solve_nu", forbidden)
    for path in fixture_reports:
        assert cli.main(["verify", str(path)]) == 0, (path, capsys.readouterr().out)
        assert json.loads(path.read_text())["format"] == "povm-duel-report"


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
