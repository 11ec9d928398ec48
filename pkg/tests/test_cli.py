import json
import subprocess
import sys
from pathlib import Path

import pytest

from bmlab.cli import main
from bmlab.gridset import Lattice
from bmlab.specs import SpecError, build_set, load_experiment, run_experiment, set_to_spec, validate_experiment

SPECS = Path(__file__).resolve().parent.parent / "specs"


def write(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return str(path)


@pytest.mark.parametrize("name,code", [
    ("x_squared_1d.json", 4),
    ("theorem_A_random_wu.json", 0),
    ("gauss_shifted_balls.json", 4),
    ("nonproduct_square.json", 4),
    ("concavity_gaussian_boxes.json", 0),
    ("pl_gaussian_indicators.json", 0),
    ("bbl_indicators.json", 0),
    ("linear_equal_sup_boxes.json", 0),
    ("thm_4_7_centered.json", 0),
    ("linear_marginal_gaussian.json", 0),
    ("weighted_product_r3.json", 0),
    ("log_bm_grid.json", 0),
    ("rescaled_bm.json", 0),
])
def test_shipped_specs(name, code):
    assert main(["check", str(SPECS / name)]) == code


def test_iso_spec(capsys):
    code = main(["iso", str(SPECS / "iso_unit_square.json")])
    assert code in (0, 3)
    assert "isoperimetric" in capsys.readouterr().out


def test_malformed_lambda(tmp_path):
    spec = json.loads((SPECS / "x_squared_1d.json").read_text())
    spec["lambda"] = "0.5"
    assert main(["check", write(tmp_path, "bad.json", spec)]) == 1
    with pytest.raises(SpecError):
        validate_experiment(spec)


@pytest.mark.parametrize("argv", [
    ["check"],
    ["check", "missing.json"],
    ["search", "--trials", "0"],
    ["search", "--family", "nope"],
    ["search", "--family", "wu_convex", "--dim", "3"],
    ["repro", "no-such-name"],
    ["check", "x.json", "--pitch-refine", "-1"],
    [],
])
def test_usage_errors(argv):
    assert main(argv) == 1


def test_bad_specs(tmp_path):
    assert main(["check", write(tmp_path, "a.json", [1, 2])]) == 1
    assert main(["check", write(tmp_path, "b.json", {"check": "nope"})]) == 1
    assert main(["check", write(tmp_path, "c.json", {"check": "bm", "A": {"box": {}}})]) == 1
    (tmp_path / "d.json").write_text("{not json")
    assert main(["check", str(tmp_path / "d.json")]) == 1


def test_report_csv_and_refinement(tmp_path, capsys):
    rep, out = tmp_path / "r.txt", tmp_path / "r.csv"
    code = main(["check", str(SPECS / "x_squared_1d.json"), "--pitch-refine", "1", "--report", str(rep),
                 "--csv", str(out)])
    assert code == 4
    text = rep.read_text()
    assert "== pitch 1/64" in text and "== pitch 1/128" in text and "WARNING" not in text
    assert out.read_text().count("\n") == 3


def test_repro_cli(tmp_path, capsys):
    assert main(["repro", "log-bm-boxes", "--csv", str(tmp_path / "x.csv")]) == 0
    assert "reproduced" in capsys.readouterr().out
    assert main(["repro", "gauss-shifted-balls", "--param", "shifts=2"]) == 3


def test_search_cli_witness_files(tmp_path, capsys):
    out = tmp_path / "s.csv"
    assert main(["search", "--family", "any", "--trials", "60", "--seed", "7", "--csv", str(out)]) == 0
    witnesses = sorted(tmp_path.glob("s.witness-*.json"))
    assert witnesses
    assert main(["check", str(witnesses[0])]) == 4


def test_search_cli_stdout(capsys):
    assert main(["search", "--trials", "3", "--seed", "1"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("trial,seed,lambda")


def test_entry_point_module():
    proc = subprocess.run([sys.executable, "-m", "bmlab.cli", "check", str(SPECS / "x_squared_1d.json")],
                          capture_output=True, text=True)
    assert proc.returncode == 4 and "certified_violation" in proc.stdout


def test_set_spec_roundtrip():
    L = Lattice(2, "1/4")
    A = build_set({"union": [{"box": {"min": ["0", "0"], "max": ["1", "1/2"]}},
                             {"ball": {"center": [2, 2], "radius": 0.5}}]}, L)
    assert build_set(set_to_spec(A), L) == A
    W = build_set({"wu_hull": {"cells": [[3, 2]]}}, L)
    assert W.n_cells == 4


def test_run_experiment_refine():
    spec = load_experiment(SPECS / "x_squared_1d.json")
    assert run_experiment(spec, refine=2).params["pitch"] == "1/128"
