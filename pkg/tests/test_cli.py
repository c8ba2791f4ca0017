import csv
import json

import pytest

from nlch import cli
from nlch.kernel import KernelOperator

SMALL = """
[domain]
eta = {eta}
L = 6.0
n = 64
[kernel]
c_J = 11.847981254502884
[sim]
eps = {eps}
T = 0.02
dt = {dt}
scheme = {scheme}
initial_condition = {ic}
ic_amplitude = {amp}
snapshot_stride = 5
[sweep]
eps_grid = 1e-1, 3e-2, 1e-2, 3e-3
lambda_grid = 1e-1, 1e-2
"""


def write_config(tmp_path, name="run.ini", eta=0.04, eps=0.01, dt=1e-3, scheme="semi_implicit",
                 ic="mollified(gaussian_bump)", amp=1.0, text=None):
    path = tmp_path / name
    path.write_text(text if text is not None else
                    SMALL.format(eta=eta, eps=eps, dt=dt, scheme=scheme, ic=ic, amp=amp))
    return path


def manifest(out):
    return json.loads((out / "manifest.json").read_text())


def test_simulate_writes_outputs(tmp_path):
    out = tmp_path / "out"
    code = cli.main(["simulate", "--config", str(write_config(tmp_path)), "--out", str(out)])
    assert code == cli.EXIT_OK
    with open(out / "trajectory.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0][0] == "t" and rows[0][-5:] == ["norm_H", "norm_V", "mu_norm_V", "energy", "residual"]
    assert len(rows) == 1 + 5
    m = manifest(out)
    assert m["status"] == "pass" and m["exit_code"] == 0
    assert m["checks"]["apriori_finite"] is True
    assert set(m["files"]) == {"trajectory.csv", "manifest.json"}
    assert m["config"]["resolved"]["n"] == 64
    assert "numpy_version" in m["prng"]


def test_simulate_is_bitwise_reproducible(tmp_path):
    cfg = write_config(tmp_path, ic="random_sym")
    for name in ("a", "b"):
        assert cli.main(["simulate", "--config", str(cfg), "--out", str(tmp_path / name)]) == 0
    assert (tmp_path / "a" / "trajectory.csv").read_bytes() == (tmp_path / "b" / "trajectory.csv").read_bytes()


def test_rk4_guard_is_bad_input(tmp_path, capsys):
    cfg = write_config(tmp_path, scheme="rk4", dt=1e-2, eps=1e-2)
    code = cli.main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")])
    assert code == cli.EXIT_INPUT
    err = capsys.readouterr().err
    assert "RK4 stability guard" in err
    assert manifest(tmp_path / "o")["status"] == "bad input"


def test_unwritable_output_dir(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    code = cli.main(["simulate", "--config", str(write_config(tmp_path)), "--out", str(blocker / "sub")])
    assert code == cli.EXIT_INPUT
    assert "not writable" in capsys.readouterr().err


def test_missing_amplitude_is_bad_input(tmp_path, capsys):
    text = SMALL.format(eta=0.04, eps=0.01, dt=1e-3, scheme="semi_implicit", ic="tanh_front", amp=1.0)
    cfg = write_config(tmp_path, text=text.replace("c_J = 11.847981254502884", ""))
    assert cli.main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")]) == cli.EXIT_INPUT
    assert "c_J" in capsys.readouterr().err


def test_missing_config_file_and_bad_args(tmp_path):
    out = str(tmp_path / "o")
    assert cli.main(["simulate", "--config", str(tmp_path / "none.ini"), "--out", out]) == cli.EXIT_INPUT
    assert cli.main(["simulate"]) == cli.EXIT_INPUT
    assert cli.main(["frobnicate"]) == cli.EXIT_INPUT
    assert cli.main(["sweep-eps", "--config", "x", "--out", out, "--threads", "0"]) == cli.EXIT_INPUT


def test_validate_reports_failed_lower_bound(tmp_path, capsys):
    cfg = write_config(tmp_path, eta=0.5)
    code = cli.main(["validate", "--config", str(cfg), "--out", str(tmp_path / "v")])
    assert code == cli.EXIT_FAIL
    captured = capsys.readouterr()
    assert json.loads(captured.out)["checks"]["A7_a_lower_bound"] is False
    assert "A7_a_lower_bound" in captured.err
    assert (tmp_path / "v" / "assumptions.json").exists()


def test_validate_passes_on_worked_example(tmp_path, capsys):
    assert cli.main(["validate", "--config", str(write_config(tmp_path))]) == cli.EXIT_OK
    assert json.loads(capsys.readouterr().out)["checks"]["A7_mass_bound"] is True


def test_numerical_abort_exit_code(tmp_path, capsys):
    cfg = write_config(tmp_path, ic="tanh_front", amp=1e200)
    code = cli.main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")])
    assert code == cli.EXIT_ABORT
    assert "non-finite" in capsys.readouterr().err
    m = manifest(tmp_path / "o")
    assert m["status"] == "numerical abort" and m["info"]["abort_step"] >= 0


def test_sweep_eps_single_value_grid(tmp_path):
    out = tmp_path / "s"
    code = cli.main(["sweep-eps", "--config", str(write_config(tmp_path)), "--out", str(out),
                     "--grid", "1e-2"])
    assert code == cli.EXIT_OK
    fit = json.loads((out / "fit.json").read_text())
    assert "order" not in fit and "pass" not in fit
    assert fit["flags"]


def test_sweep_eps_four_rows(tmp_path):
    out = tmp_path / "s"
    code = cli.main(["sweep-eps", "--config", str(write_config(tmp_path)), "--out", str(out),
                     "--threads", "2"])
    assert code in (cli.EXIT_OK, cli.EXIT_FAIL)
    with open(out / "convergence.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["param", "err_Vstar_sq", "err_L2H_sq", "total"]
    assert [float(r[0]) for r in rows[1:]] == [1e-1, 3e-2, 1e-2, 3e-3]
    fit = json.loads((out / "fit.json").read_text())
    assert set(fit["pass"]) == {"order_at_least_0.4", "bounded_by_C_eps_half"}


def test_sweep_eps_rejects_unsorted_grid(tmp_path):
    code = cli.main(["sweep-eps", "--config", str(write_config(tmp_path)), "--out", str(tmp_path / "s"),
                     "--grid", "1e-3,1e-2"])
    assert code == cli.EXIT_INPUT


def test_sweep_lambda_and_cauchy(tmp_path):
    cfg = str(write_config(tmp_path, eps=0.1))
    assert cli.main(["sweep-lambda", "--config", cfg, "--out", str(tmp_path / "l")]) == cli.EXIT_OK
    fit = json.loads((tmp_path / "l" / "fit.json").read_text())
    assert fit["pass"]["strictly_decreasing"] and len(fit["lambda_sq_int_dmu_H_sq"]) == 2
    assert cli.main(["cauchy", "--config", cfg, "--out", str(tmp_path / "c"), "--grid", "1e-1,1e-2,1e-3"]) == 0
    with open(tmp_path / "c" / "cauchy_table.csv") as fh:
        rows = list(csv.reader(fh))
    assert len(rows) == 1 + 9
    assert all(float(r[2]) == 0.0 for r in rows[1:] if r[0] == r[1])


def test_oracle_selftest_passes_and_records_budget(tmp_path, capsys):
    out = tmp_path / "o"
    code = cli.main(["oracle-selftest", "--out", str(out), "--s-points", "50000"])
    assert code == cli.EXIT_OK
    assert "PASS  envelope_vs_bruteforce" in capsys.readouterr().out
    assert manifest(out)["info"]["budget"]["s_points"] == 50000


def test_oracle_selftest_bad_budget(capsys):
    assert cli.main(["oracle-selftest", "--eig-cap", "100000"]) == cli.EXIT_INPUT


def test_oracle_selftest_detects_fault(monkeypatch, capsys):
    original = KernelOperator.apply_fast
    monkeypatch.setattr(KernelOperator, "apply_fast", lambda self, u: -original(self, u))
    assert cli.main(["oracle-selftest"]) == cli.EXIT_FAIL
    assert "convolution_fast_vs_dense" in capsys.readouterr().err


def test_version_flag(capsys):
    assert cli.main(["--version"]) == cli.EXIT_OK
    assert "0.1.0" in capsys.readouterr().out
