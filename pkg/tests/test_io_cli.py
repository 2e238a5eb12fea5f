import json
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, strategies as st

from povm_duel import cli
from povm_duel.errors import MatrixFileError
from povm_duel.io import digest, dumps, format_float, loads, matrix_from_json, parse_matrix, read_json, write_matrix
from povm_duel.reports import verify_report

import oracles as O

finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@given(finite)
def test_float_roundtrip(x):
    assert float(format_float(x)) == x


@given(st.integers(1, 5), st.integers(0, 10_000))
def test_matrix_roundtrip(d, seed):
    rng = np.random.default_rng(seed)
    m = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    doc = loads(dumps({"format": "povm-duel-matrix", "dim": d, "entries": m}))
    assert np.array_equal(matrix_from_json(doc), m)


def test_file_roundtrip(tmp_path, rng):
    u = O.haar(4, rng)
    path = tmp_path / "u.json"
    write_matrix(path, u, {"name": "haar"})
    assert np.array_equal(parse_matrix(path), u)
    assert digest(parse_matrix(path)) == digest(u)


def test_nonfinite_rejected():
    with pytest.raises(ValueError):
        format_float(float("nan"))
    with pytest.raises(MatrixFileError):
        loads('{"entries": [[[NaN, 0]]]}')


def _err(text):
    with pytest.raises(MatrixFileError) as exc:
        matrix_from_json(loads(text, "m.json"), "m.json")
    return str(exc.value)


def test_parse_error_locations():
    with pytest.raises(MatrixFileError, match="line 2 column"):
        loads('{"entries":\n  [[[1, 0]],, ]}', "m.json")
    assert "entries[1]" in _err('{"entries": [[[1, 0], [0, 0]], [[0, 0]]]}')
    assert "not square" in _err('{"entries": [[[1, 0], [0, 0]], [[0, 0]]]}')
    assert "entries[0][1]" in _err('{"entries": [[[1, 0], [0]], [[0, 0], [1, 0]]]}')
    assert "dim" in _err('{"dim": 3, "entries": [[[1, 0]]]}')
    assert "format" in _err('{"format": "other", "entries": [[[1, 0]]]}')
    assert "number" in _err('{"entries": [[["a", 0]]]}')


def test_missing_file(tmp_path):
    with pytest.raises(MatrixFileError):
        read_json(tmp_path / "nope.json")


@pytest.fixture
def files(tmp_path):
    paths = {}
    for name, argv in {"f2": ["--dim", "2"], "f3": ["--dim", "3"], "f4": ["--dim", "4"]}.items():
        p = tmp_path / f"{name}.json"
        assert cli.main(["gen", "fourier", *argv, "-o", str(p)]) == 0
        paths[name] = p
    rng = np.random.default_rng(7)
    for name in ("u", "v"):
        p = tmp_path / f"{name}.json"
        write_matrix(p, O.haar(3, rng))
        paths[name] = p
    bad = tmp_path / "bad.json"
    bad.write_text('{"entries": [[[1, 0], [0, 0]]]}')
    paths["bad"] = bad
    nonunitary = tmp_path / "nonunitary.json"
    write_matrix(nonunitary, np.array([[1, 1], [0, 1]]))
    paths["nonunitary"] = nonunitary
    return paths


def _run(argv, tmp_path, name="out.json"):
    out = tmp_path / name
    code = cli.main([*argv, "-o", str(out)])
    return code, (json.loads(out.read_text()) if out.exists() else None), out


def test_distance_and_verify(files, tmp_path):
    code, doc, out = _run(["distance", str(files["f2"])], tmp_path)
    assert code == 0
    assert doc["result"]["diamond"] == pytest.approx(O.HADAMARD_DIAMOND, abs=1e-6)
    assert cli.main(["verify", str(out)]) == 0


def test_pair_distance_verifies(files, tmp_path):
    code, doc, out = _run(["distance", str(files["u"]), str(files["v"])], tmp_path)
    assert code == 0 and doc["inputs"]["V"] is not None
    assert verify_report(read_json(out)).ok


def test_perfect_exit_codes(files, tmp_path):
    w = tmp_path / "w.json"
    code, doc, _ = _run(["perfect", str(files["f4"]), "--witness", str(w)], tmp_path)
    assert code == 0 and doc["result"]["status"] == "certified-perfect"
    assert np.allclose(np.trace(parse_matrix(w)), 1.0)
    code, doc, out = _run(["perfect", str(files["f3"])], tmp_path, "p3.json")
    assert code == 1 and doc["result"]["status"] == "certified-imperfect"
    assert cli.main(["verify", str(out)]) == 0


def test_other_commands_verify(files, tmp_path):
    for k, argv in enumerate([["tracecheck", str(files["f3"])],
                              ["classical", str(files["u"]), str(files["v"])],
                              ["simulate", str(files["f2"]), "--trials", "2000", "--seed", "1"]]):
        code, doc, out = _run(argv, tmp_path, f"r{k}.json")
        assert code == 0
        assert verify_report(read_json(out)).ok, argv[0]


def test_trace_report_values(files, tmp_path):
    _, doc, _ = _run(["tracecheck", str(files["f3"])], tmp_path)
    assert doc["result"]["trace_value"] == pytest.approx(O.F3_TRACE_VALUE, abs=1e-12)
    assert doc["result"]["necessary_violated"] is True


def test_tampered_report_fails(files, tmp_path):
    _, doc, out = _run(["distance", str(files["f2"])], tmp_path)
    doc["result"]["diamond"] = 1.5
    out.write_text(json.dumps(doc))
    assert cli.main(["verify", str(out)]) == 1
    _, doc, out = _run(["distance", str(files["f2"])], tmp_path, "b.json")
    doc["result"]["certificate"]["dual_value"] += 1e-3
    out.write_text(json.dumps(doc))
    assert cli.main(["verify", str(out)]) == 1
    _, doc, out = _run(["distance", str(files["f2"])], tmp_path, "c.json")
    doc["inputs"]["U"]["entries"][0][0][0] += 1e-9
    out.write_text(json.dumps(doc))
    assert cli.main(["verify", str(out)]) == 1


def test_input_errors(files, tmp_path):
    assert cli.main(["distance", str(files["bad"])]) == 2
    assert cli.main(["distance", str(files["nonunitary"])]) == 2
    assert cli.main(["distance", str(tmp_path / "missing.json")]) == 2
    assert cli.main(["nosuchcommand"]) == 2
    assert cli.main(["distance", str(files["f2"]), str(files["u"])]) == 2
    assert cli.main(["gen", "reflection", "--omega", "0.7"]) == 2
    assert cli.main(["simulate", str(files["f2"]), "--trials", "0"]) == 2


def test_inconclusive_exit(files, tmp_path):
    code, doc, _ = _run(["distance", str(files["u"]), "--max-iter", "3", "--gap", "1e-14"], tmp_path)
    assert code == 3 and doc["result"]["converged"] is False


def test_reflection_generator(tmp_path):
    code, doc, _ = _run(["gen", "reflection", "--uniform", "4"], tmp_path)
    assert code == 0 and doc["metadata"]["params"]["omega"] == pytest.approx(0.25)
    code, doc, _ = _run(["gen", "reflection", "--omega", "0.75", "--dim", "2"], tmp_path, "r2.json")
    assert code == 0
    axis = tmp_path / "axis.json"
    axis.write_text(json.dumps({"entries": [[1, 0], [0, 1]]}))
    code, doc, out = _run(["gen", "reflection", "--axis", str(axis)], tmp_path, "r3.json")
    assert code == 2  # axis not normalised


def test_reports_deterministic(files, tmp_path):
    docs = []
    for k in range(2):
        _, doc, _ = _run(["distance", str(files["u"]), "--seed", "3"], tmp_path, f"d{k}.json")
        doc.pop("wall_time_seconds")
        docs.append(doc)
    assert docs[0] == docs[1]


def test_console_entry(files):
    r = subprocess.run([sys.executable, "-m", "povm_duel.cli", "tracecheck", str(files["f4"])],
                       capture_output=True, text=True)
    assert r.returncode == 0
    assert json.loads(r.stdout)["result"]["trace_value"] == pytest.approx(2.0, abs=1e-12)
