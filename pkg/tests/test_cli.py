import json

import pytest

from pbound.cli import main

EX45 = "dw/dz = (z^2 + m*w) / (z + w^2); m = 0"
LV = "dz/dt = z*(z + c*w - 1); dw/dt = w*(b*z + w - a); a=-1; b=5; c=0"


def run(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, out


def run_json(capsys, argv):
    code, out = run(capsys, argv + ["--json"])
    return code, json.loads(out)


def test_mul_example45(capsys):
    code, data = run_json(capsys, ["mul", "--system", EX45, "--at", "0,0"])
    assert code == 0
    assert data["status"] == "finite"
    assert data["mul"] == 3


def test_mul_critical(capsys):
    code, data = run_json(
        capsys, ["mul", "--system", "dw/dz = (z^2 + 3/2*w) / (z + w^2)", "--at", "0,0"]
    )
    assert code == 0
    assert data["status"] == "critical"
    assert data["criticality_witness"]["lambda"] == "3/2"


def test_mul_at_infinity(capsys):
    code, data = run_json(capsys, ["lv", "--params", "-1,5,0", "--triple"])
    assert code == 0
    assert data["verdict"] == "no-strict-curve"
    assert data["multiplicities"]["inf"]["mul"] == 0


def test_bound_axis_form(capsys):
    code, data = run_json(capsys, ["bound", "--system", LV])
    assert code == 0
    assert data["bounds"]["sum_bound"] == 0
    assert data["bounds"]["product_bound"] == 6


def test_bound_with_line(capsys):
    code, data = run_json(capsys, ["bound", "--system", LV, "--line", "1,0,0"])
    assert code == 0
    assert data["bounds"]["line_bound"] == 6


def test_bound_from_file(tmp_path, capsys):
    path = tmp_path / "lv.txt"
    path.write_text(LV + "\n")
    code, data = run_json(capsys, ["bound", "--system", str(path), "--line", "1,0,0"])
    assert code == 0
    assert data["bounds"]["line_bound"] == 6


def test_darboux_search(capsys):
    lv0 = "dz/dt = z*(z + c*w - 1); dw/dt = w*(b*z + w - a); a=-1; b=0; c=0"
    code, data = run_json(capsys, ["darboux", "--system", lv0, "--max-degree", "1"])
    assert code == 0
    polys = {c["poly"] for c in data["certificates"]}
    assert "w - z + 1" in polys
    strict = [c for c in data["certificates"] if c["strict"]]
    assert len(strict) == 1
    assert strict[0]["cofactor"] in ("z + w", "w + z")


def test_lv_classification(capsys):
    code, data = run_json(capsys, ["lv", "--params", "-1,0,0"])
    assert code == 0
    assert data["verdict"] == "strict-curve"
    assert data["curve"]["poly"] == "w - z + 1"
    assert data["curve"]["cofactor"] in ("z + w", "w + z")


def test_parse_error_exit_code(capsys):
    code = main(["mul", "--system", "dw/dz = w / (z", "--at", "0,0"])
    err = capsys.readouterr().err
    assert code == 2
    assert "error" in err


def test_parse_error_json(capsys):
    code, data = run_json(capsys, ["mul", "--system", "dw/dz = w / (z", "--at", "0,0"])
    assert code == 2
    assert data["error"]["type"] == "ParseError"


def test_cap_exit_code(capsys):
    # depth 1 leaves the ramified branch unresolved: capped, exit 3
    code, data = run_json(
        capsys,
        ["mul", "--system", EX45, "--at", "0,0", "--caps", "depth=1"],
    )
    assert code == 3
    assert data["status"] == "capped"
    assert data["mul_lower_bound"] is not None


def test_caps_env_variable(monkeypatch, capsys):
    monkeypatch.setenv("PBOUND_CAPS", "depth=1,ram=8")
    code, data = run_json(capsys, ["mul", "--system", EX45, "--at", "0,0"])
    assert code == 3
    assert data["status"] == "capped"
    # an explicit flag overrides the environment
    monkeypatch.setenv("PBOUND_CAPS", "depth=1")
    code2, data2 = run_json(
        capsys, ["mul", "--system", EX45, "--at", "0,0", "--caps", "depth=32"]
    )
    assert code2 == 0
    assert data2["mul"] == 3


def test_reports_byte_identical(capsys):
    outs = set()
    for _ in range(3):
        _, out = run(capsys, ["analyze", "--system", EX45, "--json"])
        outs.add(out)
    assert len(outs) == 1


def test_analyze_includes_everything(capsys):
    code, data = run_json(capsys, ["analyze", "--system", LV])
    assert code == 0
    assert data["mul_at_origin"]["status"] == "finite"
    assert "invariant_lines" in data
    assert "bounds" in data
    assert "darboux" in data


def test_text_output(capsys):
    code, out = run(capsys, ["mul", "--system", EX45, "--at", "0,0"])
    assert code == 0
    assert "status: finite" in out
    assert "mul: 3" in out
