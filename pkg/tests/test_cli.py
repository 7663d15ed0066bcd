"""Command-line front end: outputs, reports and exit codes."""

import json
import subprocess
import sys
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from loch import io
from loch.cli import run
from loch.hilbert import build_inoue_space
from loch.operator import CoherentOperator
from loch.order import ChainWitness, chain_order

SVG = "{http://www.w3.org/2000/svg}"


def chain_files(tmp_path, top_block):
    hs = build_inoue_space(chain_order(["1", "2"]), {"1": 1, "2": 1})
    op = CoherentOperator(hs, {"1": np.array([[2.0]]), "2": np.asarray(top_block, dtype=complex)})
    path = tmp_path / "op.json"
    io.write_json(path, io.operator_to_json(op, ChainWitness(["1", "2"])))
    return path


def test_hata_svg(tmp_path):
    out = tmp_path / "x5.svg"
    assert run(["hata", "svg", "--n", "5", "--c", "0.3+0.4i", "--out", str(out)]) == 0
    root = ET.fromstring(out.read_bytes())
    assert len(root.findall(f".//{SVG}polyline")) == 64
    again = tmp_path / "again.svg"
    run(["hata", "svg", "--n", "5", "--out", str(again)])
    assert out.read_bytes() == again.read_bytes()


def test_hata_gen(tmp_path, capsys):
    assert run(["hata", "gen", "--n", "3"]) == 0
    lines = capsys.readouterr().out.strip().split("\n")
    assert lines[0].startswith("word,start_re") and len(lines) == 10


def test_hata_system_and_verify(tmp_path, capsys):
    out = tmp_path / "sys.json"
    assert run(["hata", "system", "--variant", "branch-indexed", "--depth", "1", "--samples", "2",
                "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data["variant"] == "branch-indexed" and data["index"]["chain"] == ["0,0", "1,0", "2,0"]
    capsys.readouterr()
    assert run(["verify", "measure", "--in", str(out)]) == 0
    assert json.loads(capsys.readouterr().out) == {"check": "measure", "ok": True}
    assert run(["verify", "representing", "--in", str(out)]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["ok"] and rep["max_commutator"] == 0


def test_verify_measure_failure(tmp_path, capsys):
    bad = {"index": {"elements": ["s", "b"], "leq": [["s", "s"], ["b", "b"], ["s", "b"]]},
           "nodes": {"s": {"kind": "atomic", "atoms": {"a": 1.0}},
                     "b": {"kind": "atomic", "atoms": {"a": 2.0}}}}
    path = tmp_path / "m.json"
    io.write_json(path, bad)
    assert run(["verify", "measure", "--in", str(path)]) == 1
    rep = json.loads(capsys.readouterr().out)
    assert rep["violation"]["tag"] == "sim3" and rep["violation"]["witness"] == ["s", "b", "a"]


def test_verify_coherence(tmp_path, capsys):
    assert run(["verify", "coherence", "--in", str(chain_files(tmp_path, np.diag([2, 5])))]) == 0
    assert json.loads(capsys.readouterr().out)["ok"]
    bad = chain_files(tmp_path, [[2, 1], [0, 5]])
    assert run(["verify", "coherence", "--in", str(bad)]) == 1
    rep = json.loads(capsys.readouterr().out)
    assert rep["violation"]["tag"] == "coherence" and rep["violation"]["witness"] == ["1", "2"]


def test_verify_representing_failure(tmp_path, capsys):
    s = 2 ** -0.5
    data = {"index": {"elements": ["a", "b", "t"],
                      "leq": [["a", "a"], ["b", "b"], ["t", "t"], ["a", "t"], ["b", "t"]]},
            "dims": {"a": 1, "b": 1, "t": 2},
            "embeddings": {"a<=t": [[[1, 0]], [[0, 0]]], "b<=t": [[[s, 0]], [[s, 0]]]}}
    path = tmp_path / "h.json"
    io.write_json(path, data)
    assert run(["verify", "representing", "--in", str(path)]) == 1
    rep = json.loads(capsys.readouterr().out)
    assert rep["violation"]["tag"] == "lch5" and rep["violation"]["witness"] == ["a", "b", "t"]
    assert run(["verify", "representing", "--in", str(path), "--tol-check", "0.6"]) == 0


def test_spectrum_csv(tmp_path):
    out = tmp_path / "spectrum.csv"
    assert run(["spectrum", "--in", str(chain_files(tmp_path, np.diag([2, 3]))), "--out", str(out)]) == 0
    assert out.read_text() == "re,im,nodes\n2,0,1;2\n3,0,2\n"


def test_model_build_and_verify(tmp_path, capsys):
    op = chain_files(tmp_path, np.diag([2, 2]))
    model = tmp_path / "model.json"
    assert run(["model", "build", "--in", str(op), "--out", str(model)]) == 0
    first = model.read_bytes()
    assert run(["model", "build", "--in", str(op), "--out", str(model)]) == 0
    assert model.read_bytes() == first
    data = json.loads(first)
    assert [p["multiplicity"] for p in data["points"]] == [1, 1]
    capsys.readouterr()
    assert run(["model", "verify", "--in", str(model)]) == 0
    assert json.loads(capsys.readouterr().out)["ok"]
    data["points"][0]["value"] = [7.0, 0.0]
    io.write_json(model, data)
    assert run(["model", "verify", "--in", str(model)]) == 1
    assert json.loads(capsys.readouterr().out)["violation"]["tag"] == "conjugation"


def test_model_build_with_system_file(tmp_path, capsys):
    hs = build_inoue_space(chain_order(["1", "2"]), {"1": 1, "2": 1})
    io.write_json(tmp_path / "sys.json", io.hilbert_system_to_json(hs))
    op = {"system": "sys.json", "blocks": {"1": [[[2, 0]]], "2": [[[2, 0], [0, 0]], [[0, 0], [3, 0]]]}}
    io.write_json(tmp_path / "op.json", op)
    # no chain anywhere: precondition failure
    assert run(["model", "build", "--in", str(tmp_path / "op.json")]) == 1
    assert json.loads(capsys.readouterr().out)["violation"]["tag"] == "precondition"
    io.write_json(tmp_path / "sysc.json", io.hilbert_system_to_json(hs, ChainWitness(["1", "2"])))
    assert run(["model", "build", "--in", str(tmp_path / "op.json"), "--system", str(tmp_path / "sysc.json"),
                "--out", str(tmp_path / "m.json")]) == 0


def test_malformed_inputs(tmp_path, capsys):
    p = tmp_path / "junk.json"
    p.write_text("[1,")
    assert run(["verify", "coherence", "--in", str(p)]) == 2
    assert run(["spectrum", "--in", str(tmp_path / "nope.json")]) == 2
    assert run(["hata", "gen", "--n", "2", "--c", "2+0i"]) == 2
    op = chain_files(tmp_path, np.eye(2))
    assert run(["spectrum", "--in", str(op), "--out", str(op)]) == 2


def test_usage_errors():
    for argv in (["hata", "gen", "--n", "2", "--bogus"], ["frobnicate"], [], ["--tol", "-1", "suite"]):
        with pytest.raises(SystemExit) as exc:
            run(argv)
        assert exc.value.code == 2


def test_console_script_suite():
    proc = subprocess.run([sys.executable, "-m", "loch.cli", "suite", "--seed", "42"],
                          capture_output=True, text=True, timeout=600)
    lines = proc.stdout.strip().split("\n")
    assert len([line for line in lines if line.startswith("[")]) == 12
    assert lines[-1] == "12/12 criteria passed"
    assert proc.returncode == 0
