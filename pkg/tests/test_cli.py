import csv
from pathlib import Path

import numpy as np
import pytest

from ricstream import cli, experiments
from ricstream.config import parse_config
from ricstream.snapshot import load_snapshot

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

SMALL_ODE = """experiment = ode
n_basis = 21
T_final = 20
step_h = 1e-2
checkpoints = 5, 10, 20
"""


def read_theta(path):
    with open(path) as fh:
        return np.array([float(r["value"]) for r in csv.DictReader(fh)])


def read_errors(path):
    with open(path) as fh:
        return [(float(r["checkpoint"]), float(r["err_u_pct"]), float(r["err_f_pct"]))
                for r in csv.DictReader(fh)]


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_run_scalar(tmp_path):
    out = tmp_path / "run"
    assert cli.main(["run", "--config", str(CONFIGS / "scalar.cfg"), "--out-dir", str(out)]) == 0
    assert read_theta(out / "theta.csv")[0] == pytest.approx(0.5, abs=1e-8)
    for name in ("state.snap", "theta.csv", "errors.csv", "inference.csv"):
        assert (out / name).exists()
    with open(out / "inference.csv") as fh:
        header = fh.readline().strip().split(",")
    assert header == ["s", "u_model", "f_model", "u_exact", "f_exact"]


def test_forget_to_zero_restores_prior(tmp_path):
    cfg = str(CONFIGS / "scalar.cfg")
    run, back = tmp_path / "run", tmp_path / "back"
    assert cli.main(["run", "--config", cfg, "--out-dir", str(run)]) == 0
    assert cli.main(["forget", "--config", cfg, "--snapshot", str(run / "state.snap"),
                     "--to", "0", "--out-dir", str(back)]) == 0
    assert abs(read_theta(back / "theta.csv")[0]) < 1e-9


def test_extend_after_forget_reproduces(tmp_path):
    cfg = write(tmp_path, "ode.cfg", SMALL_ODE)
    run, fgt, ext = tmp_path / "run", tmp_path / "fgt", tmp_path / "ext"
    assert cli.main(["run", "--config", cfg, "--out-dir", str(run)]) == 0
    assert cli.main(["forget", "--config", cfg, "--snapshot", str(run / "state.snap"),
                     "--to", "7.5", "--out-dir", str(fgt)]) == 0
    assert cli.main(["extend", "--config", cfg, "--snapshot", str(fgt / "state.snap"),
                     "--to", "20", "--out-dir", str(ext)]) == 0
    a, ra, _ = load_snapshot(run / "state.snap")
    b, rb, _ = load_snapshot(ext / "state.snap")
    assert b.t == a.t
    for x, y in ((a.Sxx, b.Sxx), (a.Sx, b.Sx)):
        assert np.linalg.norm(x - y) <= 1e-9 * np.linalg.norm(x)
    assert b.Sc == pytest.approx(a.Sc, rel=1e-9)
    assert [r[0] for r in read_errors(ext / "errors.csv")] == [10.0, 20.0]


def test_resume_is_bitwise(tmp_path):
    cfg = write(tmp_path, "ode.cfg", SMALL_ODE)
    whole, half, rest = tmp_path / "whole", tmp_path / "half", tmp_path / "rest"
    assert cli.main(["run", "--config", cfg, "--out-dir", str(whole)]) == 0
    assert cli.main(["run", "--config", cfg, "--to", "10", "--out-dir", str(half)]) == 0
    assert cli.main(["extend", "--config", cfg, "--snapshot", str(half / "state.snap"),
                     "--to", "20", "--out-dir", str(rest)]) == 0
    assert (whole / "state.snap").read_bytes() == (rest / "state.snap").read_bytes()


def test_retune(tmp_path):
    cfg = str(CONFIGS / "scalar.cfg")
    run, ret = tmp_path / "run", tmp_path / "ret"
    bias = write(tmp_path, "bias.txt", "# c_x\n0.6\n")
    assert cli.main(["run", "--config", cfg, "--out-dir", str(run)]) == 0
    assert cli.main(["retune", "--config", cfg, "--snapshot", str(run / "state.snap"),
                     "--bias-file", bias, "--out-dir", str(ret)]) == 0
    # full evolution from c = 0.6 gives (0.6 + 1) / 2
    assert read_theta(ret / "theta.csv")[0] == pytest.approx(0.8, abs=1e-8)


def test_oracle_scalar(tmp_path):
    out = tmp_path / "orc"
    assert cli.main(["oracle", "--config", str(CONFIGS / "scalar.cfg"), "--out-dir", str(out)]) == 0
    assert read_theta(out / "theta.csv")[0] == pytest.approx(0.5, abs=1e-10)
    state, _, _ = load_snapshot(out / "state.snap")
    assert state.Sxx[0, 0] == pytest.approx(0.5, abs=1e-10)
    assert state.Sc == pytest.approx(-0.25, abs=1e-8)


def test_oracle_matches_run_on_small_ode(tmp_path):
    cfg = write(tmp_path, "ode.cfg", SMALL_ODE + "oracle_points = 20001\n")
    assert cli.main(["run", "--config", cfg, "--out-dir", str(tmp_path / "a")]) == 0
    assert cli.main(["oracle", "--config", cfg, "--out-dir", str(tmp_path / "b")]) == 0
    a = read_theta(tmp_path / "a" / "theta.csv")
    b = read_theta(tmp_path / "b" / "theta.csv")
    assert np.linalg.norm(a - b) / np.linalg.norm(b) < 1e-6


def test_report(tmp_path, capsys):
    out = tmp_path / "run"
    cli.main(["run", "--config", str(CONFIGS / "scalar.cfg"), "--out-dir", str(out)])
    assert cli.main(["report", str(out)]) == 0
    assert "err_u" in capsys.readouterr().out


def test_exit_codes(tmp_path):
    bad = write(tmp_path, "bad.cfg", "experiment = scalar\nstep_h = -1\n")
    assert cli.main(["run", "--config", bad, "--out-dir", str(tmp_path / "x")]) == 2
    assert cli.main(["run", "--config", str(tmp_path / "missing.cfg")]) == 2
    out = tmp_path / "run"
    cli.main(["run", "--config", str(CONFIGS / "scalar.cfg"), "--out-dir", str(out)])
    other = write(tmp_path, "other.cfg", "experiment = scalar\nlambda_f = 3\n")
    snap = str(out / "state.snap")
    assert cli.main(["extend", "--config", other, "--snapshot", snap, "--to", "1"]) == 2
    assert cli.main(["extend", "--config", other, "--snapshot", snap, "--to", "1",
                     "--force", "--out-dir", str(tmp_path / "f")]) == 0
    assert cli.main(["extend", "--config", str(CONFIGS / "scalar.cfg"), "--snapshot", snap,
                     "--to", "0.5"]) == 2
    # a stiff explicit run loses positive definiteness
    stiff = write(tmp_path, "stiff.cfg",
                  "experiment = scalar\nlambda_f = 1e4\nstep_h = 0.1\nform = covariance\n")
    assert cli.main(["run", "--config", stiff, "--out-dir", str(tmp_path / "s")]) == 3


def test_custom_experiment_from_file(tmp_path):
    data = tmp_path / "data.txt"
    from ricstream.streams import write_gridded
    write_gridded(data, 0.005, np.ones((201, 1)))
    cfg = write(tmp_path, "c.cfg", f"experiment = custom\nbasis = constant\ndata_file = {data}\n"
                                   "step_h = 0.01\n")
    out = tmp_path / "out"
    assert cli.main(["run", "--config", cfg, "--out-dir", str(out)]) == 0
    assert read_theta(out / "theta.csv")[0] == pytest.approx(0.5, abs=1e-8)
    assert read_errors(out / "errors.csv") == []


def test_problem_lambda_conventions():
    ode = experiments.build_problem(parse_config("experiment = ode"))
    assert ode.lam == pytest.approx(1.0) and ode.basis.scale == pytest.approx(0.01)
    raw = experiments.build_problem(parse_config(
        "experiment = ode\ntime_normalized = false\nbasis_scale = 1\n"))
    assert raw.lam == 100.0 and raw.basis.scale == 1.0
    pois = experiments.build_problem(parse_config("experiment = poisson"))
    assert pois.lam == pytest.approx(400.0) and pois.basis.n == 225 and pois.basis.m == 101
