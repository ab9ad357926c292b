from __future__ import annotations

import json

import numpy as np
import pytest

from randers_lab.cli import main

E2 = '{"kind": "euclidean", "n": 2}'
WIND = '{"type": "euclidean-const", "v": [0.5, 0.0]}'
S3 = '{"kind": "sphere", "dim": 3, "radius": 1.0}'
HOPF = '{"type": "hopf", "c": 0.3}'


def test_convert_fixture(capsys):
    rc = main(["convert", "--space", E2, "--wind", WIND, "--point", "[0.0, 0.0]"])
    assert rc == 0
    out = json.loads(capsys.readouterr().out)
    np.testing.assert_allclose(out["result"]["a"], [[16 / 9, 0], [0, 4 / 3]], atol=1e-14)
    np.testing.assert_allclose(out["result"]["b"], [-2 / 3, 0], atol=1e-14)
    assert out["result"]["lambda"] == pytest.approx(0.75)
    assert out["version"]
    assert out["config_hash"]


def test_convert_tracks_full_float_precision(capsys):
    main(["convert", "--space", E2, "--wind", WIND, "--point", "[0.1, 0.2]"])
    out = json.loads(capsys.readouterr().out)
    # JSON floats round-trip bit-exactly (repr gives 17 significant digits
    # whenever needed)
    assert out["result"]["a"][0][0] == 16 / 9


def test_norm_subcommand(capsys):
    rc = main(["norm", "--space", E2, "--wind", WIND,
               "--point", "[0,0]", "--vector", "[1,0]"])
    assert rc == 0
    out = json.loads(capsys.readouterr().out)
    assert out["result"]["F_navigation"] == pytest.approx(2 / 3, abs=1e-14)
    assert out["result"]["F_defining"] == pytest.approx(2 / 3, abs=1e-10)


def test_distance_subcommand(capsys):
    rc = main(["distance", "--space", E2, "--wind", WIND, "--x", "[0,0]", "--y", "[1,0]"])
    assert rc == 0
    out = json.loads(capsys.readouterr().out)
    assert out["result"]["d_xy"] == pytest.approx(2 / 3, abs=1e-9)
    assert out["result"]["d_yx"] == pytest.approx(2.0, abs=1e-9)


def test_geodesic_csv_output(tmp_path, capsys):
    rc = main(["geodesic", "--space", E2, "--wind", WIND, "--x", "[0,0]",
               "--direction", "[1.5, 0]", "--T", "1.0", "--out", str(tmp_path),
               "--format", "csv"])
    assert rc == 0
    rows = (tmp_path / "geodesic.csv").read_text().strip().splitlines()
    assert rows[0] == "t,x0,x1"
    last = rows[-1].split(",")
    assert float(last[1]) == pytest.approx(1.5, abs=1e-12)


def test_geodesic_svg_output(tmp_path, capsys):
    rc = main(["geodesic", "--space", E2, "--wind", WIND, "--x", "[0,0]",
               "--direction", "[1.5, 0]", "--out", str(tmp_path), "--format", "svg"])
    assert rc == 0
    svg = (tmp_path / "geodesic.svg").read_text()
    assert svg.startswith("<svg") and "polyline" in svg


def test_flow_subcommand(capsys):
    rc = main(["flow", "--space", S3, "--wind", HOPF, "--point", "[1,0,0,0]",
               "--t", "0.5"])
    assert rc == 0
    out = json.loads(capsys.readouterr().out)
    p = np.array(out["result"]["point"])
    np.testing.assert_allclose(np.linalg.norm(p), 1.0, atol=1e-12)
    np.testing.assert_allclose(p, [np.cos(0.15), np.sin(0.15), 0, 0], atol=1e-12)


def test_cw_check_hopf_exits_zero(capsys):
    rc = main(["cw-check", "--space", S3, "--wind", HOPF, "--seed", "3",
               "--samples", "50", "--tol", "1e-4"])
    assert rc == 0
    out = json.loads(capsys.readouterr().out)
    assert out["result"]["verdict"] == "CW"


def test_cw_check_negative_control_exits_one(capsys):
    bad = json.dumps({"type": "sphere-skew", "matrix":
                      [[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -2], [0, 0, 2, 0]]})
    rc = main(["cw-check", "--space", S3, "--field", bad, "--samples", "60"])
    assert rc == 1


def test_exhaust_subcommand(capsys):
    rc = main(["exhaust", "--space", S3, "--wind", HOPF, "--seed", "4",
               "--directions", "20"])
    assert rc == 0
    out = json.loads(capsys.readouterr().out)
    assert out["result"]["worst_residual"] < 1e-6


def test_connect_subcommand(capsys):
    rc = main(["connect", "--space", E2, "--wind", WIND, "--x0", "[0,0]",
               "--x1", "[2,1]"])
    assert rc == 0
    out = json.loads(capsys.readouterr().out)
    assert out["result"]["residual"] < 1e-9
    assert out["result"]["member"]["type"] == "euclidean-const"


def test_oracle_build_and_query(tmp_path, capsys):
    args = ["--space", E2, "--wind", WIND, "--nodes", "2000", "--k", "10",
            "--cache", str(tmp_path)]
    rc = main(["oracle", "build"] + args)
    assert rc == 0
    built = json.loads(capsys.readouterr().out)
    assert built["result"]["n_nodes"] == 2000

    rc = main(["oracle", "query"] + args + ["--x", "[0,0]", "--y", "[1,0]"])
    assert rc == 0
    out = json.loads(capsys.readouterr().out)
    assert out["result"]["estimate"] == pytest.approx(2 / 3, rel=0.10)


def test_reports_are_byte_identical(tmp_path, capsys):
    argv = ["distance", "--space", E2, "--wind", WIND, "--x", "[0,0]", "--y", "[1,0]"]
    main(argv)
    first = capsys.readouterr().out
    main(argv)
    second = capsys.readouterr().out
    assert first == second


def test_usage_error_exit_code(capsys):
    rc = main(["distance", "--space", '{"kind": "nope"}', "--x", "[0,0]", "--y", "[1,0]"])
    assert rc == 2


def test_missing_space_is_usage_error(capsys):
    rc = main(["norm", "--point", "[0,0]", "--vector", "[1,0]"])
    assert rc == 2


def test_selftest_subset(capsys):
    rc = main(["selftest", "--criteria", "1,2"])
    assert rc == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert any(line.startswith("CRITERION 1: PASS") for line in lines)
    assert any(line.startswith("CRITERION 2: PASS") for line in lines)
