import json
import math

import numpy as np
import pytest

from qfiquench import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_sweep_g0_zero(capsys):
    code, out, _ = run(capsys, "sweep", "--g0", "0", "--gf-min", "0.5", "--gf-max", "2",
                       "--steps", "4", "--alpha", "x")
    assert code == 0
    rows = cli.parse_csv(out)
    assert out.splitlines()[0] == ",".join(cli.CSV_HEADER)
    got = {r["gf"]: r["f_opt"] for r in rows}
    assert np.isclose(got[0.5], 27.0) and np.isclose(got[1.0], 3.0) and np.isclose(got[2.0], 3.0)
    assert all(r["t"] is None and r["L"] is None for r in rows)


def test_sweep_infinity_rows(capsys):
    code, out, _ = run(capsys, "sweep", "--g0", "inf", "--gf", "2")
    assert code == 0
    rows = cli.parse_csv(out)
    assert [r["alpha"] for r in rows] == ["x", "y", "z"]
    assert out.splitlines()[1].startswith("inf,2,")
    r = rows[0]
    assert np.isclose(r["f_opt"], 5 / 3) and r["direction"] == "x" and r["depth"] == 2
    assert r["f_opt"] == max(x["f_q"] for x in rows)


def test_csv_round_trip():
    rows = [{"g0": math.inf, "gf": 0.1 + 0.2, "L": 400, "t": 1 / 3, "alpha": "x",
             "f_q": 2.0 / 3.0, "f_opt": 2.0 / 3.0, "direction": "x", "depth": 1,
             "converged": True, "residual": 1e-17},
            {"g0": 0.0, "gf": 2.0, "L": None, "t": None, "alpha": "z", "f_q": 0.96875,
             "f_opt": 3.0, "direction": "x", "depth": 3, "converged": False, "residual": 0.0}]
    assert cli.parse_csv(cli.rows_to_csv(rows)) == rows


def test_sweep_json_meta(capsys, tmp_path):
    out = tmp_path / "s.json"
    code, _, _ = run(capsys, "sweep", "--g0", "0", "--gf", "2", "--format", "json", "--out", str(out))
    assert code == 0
    data = json.loads(out.read_text())
    assert data["meta"]["tool"] == "qfiquench" and data["meta"]["config"]["gf"] == 2.0
    assert len(data["rows"]) == 3


def test_sweep_finite_L(capsys):
    code, out, _ = run(capsys, "sweep", "--g0", "0", "--gf", "2", "--L", "64", "--alpha", "x")
    assert code == 0
    assert cli.parse_csv(out)[0]["L"] == 64


def test_usage_errors(capsys):
    assert run(capsys, "sweep", "--g0", "0")[0] == cli.EXIT_USAGE
    assert run(capsys, "sweep", "--g0", "0", "--gf-min", "2", "--gf-max", "1", "--steps", "3")[0] == 1
    assert run(capsys, "sweep", "--g0", "0", "--gf", "1", "--L", "7")[0] == cli.EXIT_USAGE
    assert run(capsys, "nonsense")[0] == cli.EXIT_USAGE


def test_dynamics_guard(capsys):
    code, _, err = run(capsys, "dynamics", "--g0", "0", "--gf", "2", "--L", "40", "--tmax", "50")
    assert code == cli.EXIT_USAGE and "wrap" in err


def test_dynamics_constant(capsys):
    code, out, _ = run(capsys, "dynamics", "--g0", "1.5", "--gf", "1.5", "--L", "100",
                       "--tmax", "5", "--dt", "1")
    assert code == 0
    vals = [r["f_q"] for r in cli.parse_csv(out)]
    assert np.allclose(vals, vals[0])


def test_xi_command(capsys):
    code, out, _ = run(capsys, "xi", "--g0", "0.5", "--gf", "0.5")
    assert code == 0 and "true" in out.splitlines()[1]


def test_witness_command(capsys):
    code, out, _ = run(capsys, "witness", "--fq", "3.2")
    assert code == 0 and "4-partite" in out
    code, out, _ = run(capsys, "witness", "--fq", "1.0", "--format", "json")
    assert json.loads(out)["depth"] == 1


def test_verify_fast_passes(capsys):
    code, out, _ = run(capsys, "verify", "--level", "fast")
    assert code == 0
    assert json.loads(out)["passed"]


@pytest.mark.parametrize("kernel", ["f_ba", "f_aa", "f_bb"])
def test_verify_negative_control(capsys, kernel):
    code, out, _ = run(capsys, "verify", "--perturb-kernel", kernel)
    assert code == cli.EXIT_VERIFY
    rep = json.loads(out)
    assert max(c["residual"] for c in rep["checks"]) > 1e-3


def test_threads_env_deterministic(capsys, monkeypatch):
    args = ("sweep", "--g0", "inf", "--gf-min", "0.5", "--gf-max", "2", "--steps", "3")
    _, serial, _ = run(capsys, *args)
    monkeypatch.setenv("QFIQ_THREADS", "2")
    _, parallel, _ = run(capsys, *args)
    assert serial == parallel
