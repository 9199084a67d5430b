import csv
import io
import json
import subprocess
import sys

import pytest

from dphlog.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_enumerate_conics_r8_csv(capsys):
    code, out, _ = run(capsys, "enumerate", "--r", "8", "--what", "conics", "--format", "csv")
    rows = list(csv.reader(io.StringIO(out)))
    assert code == EXIT_OK
    assert rows[0] == ["d"] + [f"m{i}" for i in range(1, 9)]
    assert len(rows) - 1 == 2160


def test_enumerate_lines_r3(capsys):
    code, out, _ = run(capsys, "enumerate", "--r", "3", "--what", "lines", "--format", "csv")
    rows = out.strip().split("\n")
    assert code == EXIT_OK and rows[0] == "d,m1,m2,m3" and len(rows) == 7
    code, out, _ = run(capsys, "enumerate", "--r", "3", "--what", "lines")
    assert "lines on X_3: 6 (expected 6)" in out


def test_enumerate_json(capsys):
    code, out, _ = run(capsys, "enumerate", "--r", "4", "--what", "conics", "--format", "json", "--seed", "9")
    data = json.loads(out)
    assert data["count"] == 5 and data["pass"]
    assert data["seed"] == 9 and data["generator"]["name"] == "numpy.random.PCG64"
    assert [1, 1, 0, 0, 0] in data["classes"]


def test_census_r8(capsys):
    code, out, _ = run(capsys, "census", "--r", "8", "--format", "json")
    data = json.loads(out)
    assert code == EXIT_OK and data["pass"]
    lines = {row["type"]: row["count"] for row in data["lines"]["rows"]}
    conics = {row["type"]: row["count"] for row in data["conics"]["rows"]}
    assert lines["2;1^5"] == 56 and conics["10;4^4,3^4"] == 70
    assert data["lines"]["total"] == 240 and data["conics"]["total"] == 2160
    assert len(lines) == 7 and len(conics) == 15


def test_census_csv(capsys):
    code, out, _ = run(capsys, "census", "--r", "8", "--what", "conics", "--format", "csv")
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["type", "count"] and rows[1] == ["1;1", "8"] and rows[-1] == ["11;4^7,3", "8"]
    code, out, _ = run(capsys, "census", "--r", "6", "--format", "csv")
    rows = list(csv.reader(io.StringIO(out)))
    assert code == EXIT_OK and rows.count(["type", "count"]) == 1
    assert sum(int(n) for _, n in rows[1:]) == 27 + 27


def test_census_text(capsys):
    code, out, _ = run(capsys, "census", "--r", "8")
    assert "(6; 3^2, 2^4, 1^2)" in out and "420" in out


def test_verify_hlog(capsys):
    code, out, _ = run(capsys, "verify-hlog", "--r", "5")
    assert code == EXIT_OK and "PASS" in out
    code, out, _ = run(capsys, "verify-hlog", "--r", "8", "--format", "json")
    data = json.loads(out)
    assert code == EXIT_OK and data["relation_method"] == "graph" and data["graph"]["connected"]


def test_verify_hlog_detects_flipped_tau(capsys):
    code, out, _ = run(capsys, "verify-hlog", "--r", "6", "--flip-tau", "4", "--format", "json")
    data = json.loads(out)
    assert code == EXIT_FAIL and not data["hlog_zero"]
    assert "hlog = 0 fails" in data["failure"] and "nonzero coefficients" in data["failure"]


@pytest.mark.parametrize("r", [3, 4, 5])
def test_verify_identity_small(capsys, r):
    code, out, _ = run(capsys, "verify-identity", "--r", str(r), "--points", "4")
    assert code == EXIT_OK and "PASS" in out


def test_verify_identity_prints_signs(capsys):
    code, out, _ = run(capsys, "verify-identity", "--r", "4", "--points", "2")
    assert "signs (-,+,+,+,-)" in out


def test_verify_identity_tolerance_failure(capsys):
    code, out, _ = run(capsys, "verify-identity", "--r", "4", "--points", "2", "--tol", "1e-30")
    assert code == EXIT_FAIL and "FAIL" in out


def test_json_is_byte_identical(tmp_path):
    outs = []
    for k in range(2):
        path = tmp_path / f"run{k}.json"
        assert main(["verify-identity", "--r", "5", "--points", "3", "--seed", "17",
                     "--format", "json", "--out", str(path)]) == EXIT_OK
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    data = json.loads(outs[0])
    assert data["seed"] == 17 and data["package"]["name"] == "dphlog"
    assert all("time" not in key for key in data)


def test_different_seed_changes_targets(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    main(["verify-identity", "--r", "4", "--points", "2", "--seed", "1", "--format", "json", "--out", str(a)])
    main(["verify-identity", "--r", "4", "--points", "2", "--seed", "2", "--format", "json", "--out", str(b)])
    assert json.loads(a.read_text())["targets"] != json.loads(b.read_text())["targets"]


@pytest.mark.parametrize("argv", [
    ["enumerate", "--r", "9", "--what", "lines"],
    ["enumerate", "--r", "4"],
    ["frobnicate", "--r", "4"],
    ["verify-identity", "--r", "7"],
    ["verify-identity", "--r", "4", "--points", "0"],
    ["census", "--r", "5", "--format", "xml"],
    [],
])
def test_usage_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == EXIT_USAGE and "error" in err


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "dphlog.cli", "enumerate", "--r", "3", "--what", "conics",
                           "--format", "csv"], capture_output=True, text=True)
    assert proc.returncode == 0
    rows = proc.stdout.splitlines()
    assert rows[0] == "d,m1,m2,m3"
    assert sorted(rows[1:]) == ["1,0,0,1", "1,0,1,0", "1,1,0,0"]


def test_pick_base_is_clear():
    import numpy as np

    from dphlog.cli import build_models, pick_base
    from dphlog.hyperlog import paths_clear

    rng = np.random.default_rng(5)
    cfg, models, _ = build_models(6, rng, 5)
    base, base_c = pick_base(cfg, models, rng)
    assert base_c == (complex(base[0]), complex(base[1]))
    assert paths_clear(models, base_c, base_c)


@pytest.mark.slow
def test_stretch_r7(capsys):
    code, out, _ = run(capsys, "verify-identity", "--r", "7", "--stretch", "--points", "1", "--format", "json")
    body = json.loads(out)
    assert code == EXIT_OK and len(body["models"]) == 126
    assert body["max_abs_residual"] < 1e-6
