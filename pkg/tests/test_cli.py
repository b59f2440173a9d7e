import json
import subprocess
import sys

import numpy as np
import pytest

from parqq import cli
from parqq.adversary import read_matrix, read_matrix_csv
from parqq.errors import PropertyViolation


def run_json(*argv):
    code, out, err = cli.run(list(argv))
    assert code == 0, err
    return json.loads(out)


def test_dual_verify_example():
    out = run_json("dual-verify", "--problem", "ed", "--n", "12", "--p", "3")
    assert out["feasible"] is True and out["maxL"] <= 1
    assert out["objective"] == pytest.approx(out["closed_form_objective"], rel=1e-12)


def test_dual_verify_methods_agree():
    sym = run_json("dual-verify", "--n", "7", "--p", "2", "--scale", "3")
    naive = run_json("dual-verify", "--n", "7", "--p", "2", "--scale", "3", "--method", "naive")
    assert sym["maxL"] == pytest.approx(naive["maxL"], rel=1e-9)
    assert sym["feasible"] is False


def test_spectra_csv_example():
    code, out, _ = cli.run(["spectra", "--n", "4", "--r", "2", "--p", "1"])
    assert code == 0
    rows = [line.split(",") for line in out.strip().splitlines()[1:]]
    assert [(float(a), int(b)) for a, b in rows] == [(1.0, 1), (0.0, 3), (-0.5, 2)]


def test_unknown_command_exits_2():
    assert cli.run(["frobnicate"])[0] == 2
    assert cli.run([])[0] == 2
    assert cli.run(["bounds", "--function", "or:4"])[0] == 2
    assert cli.run(["bounds", "--function", "nope:4", "--p", "1"])[0] == 2


def test_property_violation_exits_3(monkeypatch):
    def boom(args):
        raise PropertyViolation("forced", {"seed": 1})

    monkeypatch.setitem(cli.HANDLERS, "bounds", boom)
    code, out, err = cli.run(["bounds", "--function", "or:3", "--p", "1"])
    assert code == 3 and "reproducer" in err and out == ""


def test_bounds_and_walk_cost():
    b = run_json("bounds", "--function", "or:4", "--p", "2", "--c", "3")
    assert b["bs"] == 4 and b["dpar_upper"] == 4
    w = run_json("walk-cost", "--problem", "ed", "--n", "64", "--p", "8")
    assert {"r", "S", "U", "C", "eps", "delta", "total"} <= set(w)
    fixed = run_json("walk-cost", "--problem", "ksum", "--k", "3", "--n", "64", "--p", "2", "--r", "16")
    assert fixed["r"] == 16


def test_simulate_commands():
    g = run_json("simulate", "grover", "--n", "64", "--p", "4", "--marked", "17")
    assert g["success"] == pytest.approx(0.9613, abs=1e-4)
    assert g["log"]["total_rounds"] == g["rounds"]
    i = run_json("simulate", "interrogate", "--n", "16", "--p", "4", "--eps", "0.1", "--x", "random:3")
    assert i["T"] == 13 and i["rounds"] == 4
    assert i["success"] == pytest.approx(i["closed_form"], abs=1e-12)


def test_lgc_solve_with_witness(tmp_path):
    path = tmp_path / "sol.json"
    out = run_json("lgc-solve", "--n", "3", "--p", "1", "--witness-pairs", "5", "--solution-out", str(path))
    assert out["feasible"] and out["weak_duality_holds"]
    assert out["witness"]["min_cut_sum"] == pytest.approx(1.0, abs=1e-9)
    saved = json.loads(path.read_text())
    assert saved["objective"] == pytest.approx(out["objective"])


def test_fact_check_export(tmp_path):
    out = run_json("fact-check", "--check", "fact1", "--trials", "50")
    assert out["max_ratio"] <= 2
    binary = tmp_path / "gamma.bin"
    chain = run_json("fact-check", "--check", "chain", "--n", "3", "--q", "6", "--p", "1", "--export", str(binary))
    assert chain["ratio"] >= chain["ratio_floor"]
    csv = tmp_path / "gamma.csv"
    run_json("fact-check", "--check", "chain", "--n", "3", "--q", "6", "--p", "1", "--export", str(csv))
    np.testing.assert_allclose(read_matrix(binary), read_matrix_csv(csv), rtol=1e-11, atol=1e-14)


def test_output_is_deterministic(tmp_path):
    argv = ["fact-check", "--check", "fact1", "--trials", "30", "--seed", "4"]
    assert cli.run(argv) == cli.run(argv)
    target = tmp_path / "o.json"
    code, out, _ = cli.run(argv + ["--out", str(target)])
    assert code == 0 and out == "" and target.read_text() == cli.run(argv)[1]


def test_config_file(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"command": "dual-verify", "problem": "ed", "n": 12, "p": 3}))
    assert cli.run(["--config", str(cfg)]) == cli.run(["dual-verify", "--n", "12", "--p", "3"])
    # explicit flags come after the config ones, so they win
    overridden = json.loads(cli.run(["dual-verify", "--config", str(cfg), "--p", "2"])[1])
    assert overridden["p"] == 2
    cfg.write_text("[1, 2]")
    assert cli.run(["--config", str(cfg)])[0] == 2


def test_sweep_single_point_matches_run():
    direct = run_json("walk-cost", "--problem", "ed", "--n", "64", "--p", "2")
    swept = run_json("sweep", "--target", "walk-cost", "--set", "problem=ed", "--set", "p=2", "--grid", "n=64")
    assert swept["grid"][0]["values"] == direct


def test_sweep_fit_ed_dual():
    out = run_json(
        "sweep", "--target", "dual-verify", "--set", "problem=ed",
        "--grid", "n=64,256,1024,4096", "--grid", "p=1,2,4",
        "--metric", "objective", "--fit", "n/p", "--jobs", "2",
    )
    assert out["failed"] == 0
    assert out["fit"]["slope"] == pytest.approx(2 / 3, abs=0.01)


def test_sweep_failure_recorded():
    code, out, err = cli.run(["sweep", "--target", "walk-cost", "--set", "problem=ed", "--set", "p=8", "--grid", "n=4,64"])
    assert code == 2 and "failed" in err
    cells = json.loads(out)["grid"]
    assert "error" in cells[0] and "values" in cells[1]


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "parqq.cli", "spectra", "--n", "4", "--r", "2"], capture_output=True, text=True
    )
    assert proc.returncode == 0 and proc.stdout.startswith("eigenvalue")
