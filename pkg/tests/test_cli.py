import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from activesense import cli, csvio
from activesense.lyapunov import analytic_bounds


def test_simulate_settles_on_circle(tmp_path, capsys):
    out = tmp_path / "traj.csv"
    code = cli.run(["simulate", "--k", "1", "--a", "0.70710678", "--x0", "1", "--z0", "1", "--t-end", "60", "--out", str(out)])
    assert code == 0
    assert "simulate:" in capsys.readouterr().out
    cols = csvio.read_csv(out)
    assert list(cols) == ["t", "x", "z", "u"]
    t = np.array(cols["t"])
    x, z = np.array(cols["x"]), np.array(cols["z"])
    assert t[0] == 0.0 and t[-1] == 60.0
    tail = t >= 60 - 2 * math.pi
    assert np.all(np.abs(np.hypot(x[tail], z[tail]) - 0.70710678) < 1e-2)


def test_floquet_sweep(tmp_path, capsys):
    out = tmp_path / "fl.csv"
    assert cli.run(["floquet", "--delta-min", "0", "--delta-max", "4", "--step", "0.01", "--out", str(out)]) == 0
    line = capsys.readouterr().out
    crit = float(line.split("delta* = ")[1].split(";")[0])
    assert 3.15 <= crit <= 3.25
    cols = csvio.read_csv(out)
    assert list(cols) == list(csvio.FLOQUET_HEADER)
    assert len(cols["delta"]) == 401
    assert set(cols["stable"]) == {0, 1}


def test_lyapunov_auto_eta(tmp_path):
    out = tmp_path / "l.json"
    assert cli.run(["lyapunov", "--delta", "0.43", "--eta", "auto", "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data["verified"] is True
    assert data["eta"] == pytest.approx(1 + math.sqrt(7), abs=1e-12)
    assert {"delta", "eta", "verified", "worstDetQ", "worstTraceQ", "argminT"} <= set(data)
    assert data["deltaDagger"] == pytest.approx(analytic_bounds()[0], abs=1e-15)


def test_lyapunov_explicit_eta_fails_large_delta(tmp_path):
    out = tmp_path / "l.json"
    assert cli.run(["lyapunov", "--delta", "1.0", "--eta", "3", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["verified"] is False


def test_observability(tmp_path):
    out = tmp_path / "o.json"
    assert cli.run(["observability", "--x", "0.2", "--z", "1.5", "--seed", "4", "--n-feedbacks", "20", "--n-points", "50", "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data["nonlinearCondition"] == 2 * 1.5**2
    assert data["linearRank"] == 1
    assert data["impossibility"]["maxDiscrepancy"] == 0.0
    out2 = tmp_path / "h.json"
    assert cli.run(["observability", "--gamma", "hyperbolic", "--c0", "2", "--c1", "0.5", "--out", str(out2)]) == 0
    assert abs(json.loads(out2.read_text())["nonlinearCondition"]) < 1e-10


def test_doa_small(tmp_path):
    out = tmp_path / "d.csv"
    argv = ["doa", "--nx", "6", "--nz", "5", "--n-t0", "3", "--periods", "30", "--out", str(out)]
    assert cli.run(argv) == 0
    long = csvio.read_csv(out)
    summary = csvio.read_csv(tmp_path / "d_summary.csv")
    assert list(long) == list(csvio.DOA_LONG_HEADER)
    assert list(summary) == list(csvio.DOA_SUMMARY_HEADER)
    assert len(long["x0"]) == 6 * 5 * 3 and len(summary["x0"]) == 30
    assert set(long["class"]) <= {"converges", "diverges", "undecided"}
    flags = np.array([summary["conservativeFlag"], summary["alwaysDivergesFlag"], summary["dependentFlag"]])
    assert flags.sum(axis=0).max() <= 1


def test_identical_argv_identical_bytes(tmp_path):
    outs = []
    for i in range(2):
        out = tmp_path / f"o{i}.json"
        cli.run(["observability", "--seed", "11", "--n-feedbacks", "5", "--out", str(out)])
        outs.append(out.read_bytes())
        d = tmp_path / f"d{i}.csv"
        cli.run(["doa", "--nx", "4", "--nz", "4", "--n-t0", "2", "--periods", "20", "--threads", str(i + 1), "--out", str(d)])
        outs.append(d.read_bytes())
    assert outs[0] == outs[2]
    assert outs[1] == outs[3]


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"delta": 1.0, "eta": "auto"}))
    out = tmp_path / "l.json"
    assert cli.run(["lyapunov", "--config", str(cfg), "--out", str(out)]) == 0
    assert json.loads(out.read_text())["delta"] == 1.0
    assert cli.run(["lyapunov", "--config", str(cfg), "--delta", "0.2", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["delta"] == 0.2


def test_exit_codes(tmp_path):
    assert cli.run([]) == cli.EXIT_USAGE
    assert cli.run(["bogus"]) == cli.EXIT_USAGE
    assert cli.run(["lyapunov", "--delta", "abc"]) == cli.EXIT_USAGE
    assert cli.run(["lyapunov", "--eta", "0.5", "--out", str(tmp_path / "x.json")]) == cli.EXIT_VALIDATION
    assert cli.run(["simulate", "--a", "-1", "--out", str(tmp_path / "x.csv")]) == cli.EXIT_VALIDATION
    assert cli.run(["floquet", "--delta-min", "2", "--delta-max", "1", "--out", str(tmp_path / "x.csv")]) == cli.EXIT_VALIDATION
    assert cli.run(["doa", "--nx", "0", "--out", str(tmp_path / "x.csv")]) == cli.EXIT_VALIDATION
    assert cli.run(["lyapunov", "--config", str(tmp_path / "missing.json")]) == cli.EXIT_IO
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert cli.run(["lyapunov", "--out", str(blocker / "x.json")]) == cli.EXIT_IO
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"nonsense": 1}))
    assert cli.run(["lyapunov", "--config", str(bad)]) == cli.EXIT_USAGE
    # validation happens before any file is written
    assert not (tmp_path / "x.csv").exists()


@given(st.lists(st.floats(allow_nan=False), min_size=1, max_size=30))
def test_csv_round_trip_bit_identical(values):
    import tempfile
    from pathlib import Path

    with tempfile.TemporaryDirectory() as d:
        path = Path(d) / "v.csv"
        csvio.write_csv(path, ("v", "flag"), [(v, i % 2 == 0) for i, v in enumerate(values)])
        back = csvio.read_csv(path)
    assert [np.float64(v).tobytes() for v in back["v"]] == [np.float64(v).tobytes() for v in values]
    assert all(isinstance(v, float) for v in back["v"])
    assert back["flag"] == [int(i % 2 == 0) for i in range(len(values))]
