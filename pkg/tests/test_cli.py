import csv
import json
import math
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from slhnet import io
from slhnet.cli import run

MODELS = Path(__file__).resolve().parent.parent / "models"


def m(name):
    return str(MODELS / f"{name}.json")


def _err(capsys):
    err = capsys.readouterr().err.strip().splitlines()
    assert len(err) == 1
    return err[0]


def test_validate_identity(capsys):
    assert run(["validate", m("identity")]) == 0
    assert capsys.readouterr().out == "ok slh\n"


def test_validate_nonunitary(capsys):
    assert run(["validate", m("nonunitary")]) == 2
    line = _err(capsys)
    assert line.startswith("INVARIANT: ") and "S" in line and "deviation 3" in line


def test_validate_loose_tol_accepts(tmp_path, capsys):
    p = tmp_path / "near.json"
    p.write_text('{"version": 1, "slh": {"n": 1, "dim": 1, "S": [[[1.000001, 0]]],'
                 ' "L": [[[0, 0]]], "H": [[[0, 0]]]}}')
    assert run(["validate", str(p)]) == 2
    assert run(["validate", str(p), "--tol", "1e-5"]) == 0


def test_validate_network(capsys):
    assert run(["validate", m("two_cavities")]) == 0
    assert "network" in capsys.readouterr().out


@pytest.mark.parametrize("text, needle", [
    ("{not json", "line 1"),
    ('{"version": 2, "slh": {}}', "version"),
    ('{"version": 1}', "exactly one"),
    ('{"version": 1, "slh": {"n": 1, "dim": 1, "S": [[[1, 0]]], "L": [[[0, 0]]]}}', "slh.H"),
    ('{"version": 1, "slh": {"n": 1, "dim": 2, "S": [[[1, 0]]], "L": [[[0, 0]]],'
     ' "H": [[[0, 0]]]}}', "slh.S"),
    ('{"version": 1, "slh": {"n": 1, "dim": 1, "S": [[1]], "L": [[[0, 0]]],'
     ' "H": [[[0, 0]]]}}', "slh.S"),
])
def test_parse_errors(tmp_path, capsys, text, needle):
    p = tmp_path / "bad.json"
    p.write_text(text)
    assert run(["validate", str(p)]) == 2
    line = _err(capsys)
    assert needle in line and ":" in line.split(" ")[0]


def test_missing_file(capsys):
    assert run(["validate", "/nonexistent/model.json"]) == 2
    assert _err(capsys).startswith("PARSE: ")


def test_ito_scalar_kick(tmp_path):
    out = tmp_path / "g.json"
    assert run(["ito", m("kick"), "--out", str(out)]) == 0
    mf = io.parse_model(out)
    assert mf.kind == "slh"
    G = mf.model
    assert G.S[0, 0, 0, 0] == -1j and G.L[0, 0, 0] == 0 and G.H[0, 0] == 0


def test_ito_csv(capsys):
    assert run(["ito", m("kick"), "--format", "csv"]) == 0
    rows = list(csv.reader(capsys.readouterr().out.splitlines()))
    assert rows[0] == ["block", "row", "col", "re", "im"]
    assert rows[1] == ["S", "0", "0", "0.0", "-1.0"]


def test_stratonovich_roundtrip(tmp_path):
    g, c = tmp_path / "g.json", tmp_path / "c.json"
    assert run(["stratonovich", m("cavity_a"), "--out", str(c)]) == 0
    assert run(["ito", str(c), "--out", str(g)]) == 0
    G0 = io.parse_model(m("cavity_a")).model
    assert io.parse_model(g).model.max_abs_diff(G0) <= 1e-12


def test_wrong_kind(capsys):
    assert run(["ito", m("cavity_a")]) == 2
    assert "stratonovich" in _err(capsys)


def test_reduce_matches_series_bytes(tmp_path):
    r, s = tmp_path / "r.csv", tmp_path / "s.csv"
    assert run(["reduce", m("two_cavities"), "--format", "csv", "--out", str(r)]) == 0
    assert run(["series", m("cavity_b"), m("cavity_a"), "--format", "csv", "--out", str(s)]) == 0
    assert r.read_bytes() == s.read_bytes()


def test_reduce_trace(tmp_path):
    t = tmp_path / "trace.csv"
    assert run(["reduce", m("two_cavities"), "--trace", str(t), "--out",
                str(tmp_path / "g.json")]) == 0
    assert t.read_text().splitlines() == ["step,source,target,cond,channels",
                                          "0,a.out[0],b.in[0],1.0,1"]


def test_reduce_algebraic_loop(capsys):
    assert run(["reduce", m("beam_splitter_loop")]) == 3
    line = _err(capsys)
    assert line.startswith("ALGEBRAIC_LOOP: ") and "m.out[0] -> m.in[0]" in line


def test_concat(capsys):
    assert run(["concat", m("identity"), m("identity")]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["slh"]["n"] == 2 and data["slh"]["dim"] == 1


def test_evolve_dephasing(tmp_path):
    out = tmp_path / "traj.csv"
    assert run(["evolve", m("dephasing"), "--rho0", m("plus_state"), "--observables",
                m("qubit_observables"), "--t-end", "1", "--dt", "1e-3", "--every", "100",
                "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.read_text().splitlines()))
    assert len(rows) == 11 and float(rows[-1]["time"]) == 1.0
    assert abs(float(rows[-1]["sx_re"]) - math.exp(-2)) <= 1e-6
    assert abs(float(rows[-1]["sz_re"])) <= 1e-12


def test_evolve_diverges(tmp_path, capsys):
    p = tmp_path / "fast.json"
    G = io.parse_model(m("dephasing")).model
    blk = io.encode_triple(G)
    blk["L"] = io.encode_matrix(10 * np.array([[0, 1], [0, 0]]))
    p.write_text(io.dump_model("slh", blk))
    assert run(["evolve", str(p), "--rho0", m("plus_state"), "--t-end", "5", "--dt", "1"]) == 3
    assert _err(capsys).startswith("DIVERGED: ")


def test_evolve_bad_dt(capsys):
    assert run(["evolve", m("dephasing"), "--rho0", m("plus_state"), "--t-end", "1",
                "--dt", "0"]) == 2
    assert _err(capsys).startswith("USAGE: ")


def test_sweep(capsys):
    assert run(["sweep", m("cavity_response"), "--omega-min", "1.3", "--omega-max", "1.3",
                "--omega-steps", "1"]) == 0
    rows = capsys.readouterr().out.splitlines()
    assert rows == ["omega,Xi_0_0_re,Xi_0_0_im", "1.3,-1.0,0.0"]


def test_wire(capsys):
    assert run(["wire", "--epsilon", "2", "--times", "0,10"]) == 0
    rows = list(csv.reader(capsys.readouterr().out.splitlines()))
    assert rows[0] == ["x", "t=0.0", "t=10.0"]
    peak0 = max(rows[1:], key=lambda r: float(r[1]))
    peak1 = max(rows[1:], key=lambda r: float(r[2]))
    assert float(peak0[0]) - float(peak1[0]) == pytest.approx(10.0)


def test_wire_domain_exit(capsys):
    assert run(["wire", "--times", "40"]) == 3
    assert _err(capsys).startswith("DOMAIN_EXIT: ")


def test_parity(capsys):
    assert run(["parity", m("fermi_decay")]) == 0
    assert capsys.readouterr().out.splitlines()[2] == "L[0],odd,0.0,ok"
    assert run(["parity", m("fermi_even_coupling")]) == 2
    cap = capsys.readouterr()
    assert "L[0],odd,2.0,FAIL" in cap.out
    assert cap.err.strip() == "PARITY: parity table violated by L[0]"


def test_deterministic_output(tmp_path):
    outs = []
    for k in range(2):
        p = tmp_path / f"run{k}.csv"
        run(["evolve", m("dephasing"), "--rho0", m("plus_state"), "--observables",
             m("qubit_observables"), "--t-end", "0.5", "--dt", "0.01", "--out", str(p)])
        outs.append(p.read_bytes())
    assert outs[0] == outs[1]


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "slhnet.cli", "validate", m("nonunitary")],
                         capture_output=True, text=True)
    assert res.returncode == 2
    assert res.stderr.startswith("INVARIANT: ") and res.stderr.count("\n") == 1
