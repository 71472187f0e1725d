import json
import subprocess
import sys

import pytest

from confdim.cli import bundled_examples, main
from confdim.igs import load_spec, validate


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_bundled_examples():
    paths = bundled_examples()
    assert {p.stem for p in paths} == {"diamond", "fig5_left", "fig5_right", "two_branch"}
    for p in paths:
        assert validate(load_spec(p)).ok


def test_report_diamond(capsys):
    code, out = run(capsys, "report", "examples/diamond.json")
    rep = json.loads(out)
    assert code == 0 and rep["q_star"] == "1.0" and rep["attained"] is False
    assert float(rep["intrinsic_dimension"]) == pytest.approx(1.2924813, abs=1e-7)
    assert "tolerances" in rep["provenance"]


def test_report_fig5(capsys, tmp_path):
    code, out = run(capsys, "report", "examples/fig5_left.json")
    rep = json.loads(out)
    assert float(rep["q_star"]) == pytest.approx(1.5, abs=1e-6)
    assert rep["removable_edges"] == ["e9"] and rep["clp"] and not rep["attained"]
    svg = tmp_path / "w.svg"
    code, out = run(capsys, "report", "examples/fig5_right.json", "--plot", str(svg))
    rep = json.loads(out)
    assert rep["attained"] and rep["clp"] and rep["witness_density"]
    assert svg.read_text().startswith("<svg")


def test_deterministic(capsys):
    a = run(capsys, "attainment", "fig5_right")[1]
    b = run(capsys, "attainment", "fig5_right")[1]
    assert a == b


def test_exit_codes(capsys, tmp_path, monkeypatch):
    assert main(["validate", str(tmp_path / "missing.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{oops")
    assert main(["validate", str(bad)]) == 2
    assert "line 1" in capsys.readouterr().err
    monkeypatch.setenv("CONFDIM_BUDGET", "50")
    assert main(["build", "diamond", "--level", "3"]) == 3


def test_invalid_spec_exit(capsys, tmp_path):
    data = load_spec("diamond").to_json()
    data["graph"]["edges"].append({"id": "e7", "ends": ["x0", "x3"]})
    p = tmp_path / "degenerate.json"
    p.write_text(json.dumps(data))
    assert main(["validate", str(p)]) == 2
    assert main(["critical-exponent", str(p)]) == 2


@pytest.mark.parametrize("argv", [
    ["validate", "diamond", "--find-symmetry"],
    ["build", "diamond", "--level", "2", "--out", "graphml"],
    ["modulus", "diamond", "--p", "2"],
    ["critical-exponent", "fig5_left"],
    ["clp", "two_branch"],
    ["verify", "diamond", "--check", "multiplicativity", "--p", "2", "--level", "2"],
    ["verify", "fig5_left", "--check", "cascade", "--p", "1.5", "--level", "2"],
    ["verify", "fig5_right", "--check", "cutpoints"],
    ["verify", "fig5_left", "--check", "hat", "--level", "1"],
    ["metric", "diamond", "--level", "2", "--pairs", "sample:3"],
    ["regularity", "diamond", "--samples", "10", "--level", "4"],
    ["subset", "diamond", "--edges", "e1,e2,e4,e6", "--level", "2", "--report"],
    ["porosity", "diamond", "--auto", "--samples", "10"],
    ["vertex-modulus", "diamond", "--level", "2"],
    ["gh-error", "--level", "3"],
])
def test_commands_succeed(capsys, argv):
    code, out = run(capsys, *argv)
    assert code == 0 and out


def test_metric_density_file(capsys, tmp_path):
    rho = tmp_path / "rho.json"
    rho.write_text(json.dumps({"rho": {f"e{i}": "0.25" for i in range(1, 7)}}))
    code, out = run(capsys, "metric", "diamond", "--density", str(rho), "--level", "1", "--pairs", "all")
    lines = out.strip().splitlines()
    assert code == 0 and lines[0] == "v,w,distance"
    assert "x0,x3,1.0" in lines
    rho.write_text(json.dumps({"rho": {f"e{i}": "0.1" for i in range(1, 7)}}))
    assert main(["metric", "diamond", "--density", str(rho), "--level", "1"]) == 2


def test_gh_error_value(capsys):
    code, out = run(capsys, "gh-error", "--level", "3")
    assert json.loads(out)["error_bound"] == "0.03125"


def test_console_script_entry():
    proc = subprocess.run([sys.executable, "-m", "confdim.cli", "clp", "diamond"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and json.loads(proc.stdout)["clp"] is False
