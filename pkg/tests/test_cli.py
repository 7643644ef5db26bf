"""End-to-end runs of the command line entry point (in process)."""

import hashlib
import json

import pytest

from lambda_adapt.cli import main

BASE = """[system]
omega_a = 50.0
gamma_a = 1.0
gamma_b = 1.0

[pulse]
family = exponential
delta = 1.0

[mixture]
p_a0 = 0.5
"""


def write(tmp_path, text, name="run.ini"):
    path = tmp_path / name
    path.write_text(text)
    return path


def read_meta(path):
    first = path.read_text().splitlines()[0]
    assert first.startswith("#")
    return json.loads(first[1:])


class TestSimulate:
    def test_artifacts_and_exit_code(self, tmp_path):
        cfg = write(tmp_path, BASE)
        out = tmp_path / "out"
        assert main(["simulate", "--config", str(cfg),
                     "--out", str(out)]) == 0
        for name in ("trajectory.csv", "ledger.json", "entropy.json"):
            assert (out / name).exists()

        meta = read_meta(out / "trajectory.csv")
        assert meta["command"] == "simulate"
        assert meta["config_sha256"] == \
            hashlib.sha256(cfg.read_bytes()).hexdigest()

        ledger = json.loads((out / "ledger.json").read_text())
        assert abs(ledger["residual"]) <= 1e-8 * 50.0
        assert abs(ledger["adaptation_residual"]) <= 1e-6
        assert ledger["w_over_hw"] == pytest.approx(4.0 / 3.0, abs=1e-4)

        entropy = json.loads((out / "entropy.json").read_text())
        assert 0.0 < entropy["asymptotic"]["s_e"] < 2.0

    def test_points_caps_table_rows(self, tmp_path):
        cfg = write(tmp_path, BASE)
        out = tmp_path / "out"
        assert main(["simulate", "--config", str(cfg), "--out", str(out),
                     "--points", "50"]) == 0
        lines = (out / "trajectory.csv").read_text().splitlines()
        n_rows = len(lines) - 2  # metadata + header
        assert n_rows <= 51
        header = lines[1].split(",")
        assert header == ["t", "re_psi", "im_psi", "p_e", "p_ab"]

    def test_off_resonant_run_reports_flux_only(self, tmp_path):
        cfg = write(tmp_path, BASE.replace("delta = 1.0",
                                           "delta = 1.0\ndelta_l = 0.5"))
        out = tmp_path / "out"
        assert main(["simulate", "--config", str(cfg),
                     "--out", str(out)]) == 0
        ledger = json.loads((out / "ledger.json").read_text())
        assert "note" in ledger
        assert "w_abs" not in ledger

    def test_reruns_are_bit_identical(self, tmp_path):
        cfg = write(tmp_path, BASE)
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert main(["simulate", "--config", str(cfg), "--out", str(out1),
                     "--seedless"]) == 0
        assert main(["simulate", "--config", str(cfg), "--out", str(out2)]) == 0
        for name in ("trajectory.csv", "ledger.json", "entropy.json"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


class TestExitCodes:
    def test_bad_mixture_is_config_error(self, tmp_path):
        cfg = write(tmp_path, BASE.replace("p_a0 = 0.5", "p_a0 = 1.5"))
        assert main(["simulate", "--config", str(cfg),
                     "--out", str(tmp_path / "o")]) == 2

    def test_unknown_key_is_config_error(self, tmp_path):
        cfg = write(tmp_path, BASE + "\n[system]\n", name="dup.ini")
        # duplicate section: configparser refuses, mapped to exit 2
        assert main(["simulate", "--config", str(cfg),
                     "--out", str(tmp_path / "o")]) == 2
        cfg2 = write(tmp_path, BASE + "\n[laser]\npower = 1\n", name="u.ini")
        assert main(["simulate", "--config", str(cfg2),
                     "--out", str(tmp_path / "o2")]) == 2

    def test_missing_config_is_config_error(self, tmp_path):
        assert main(["simulate", "--config", str(tmp_path / "absent.ini"),
                     "--out", str(tmp_path / "o")]) == 2

    def test_coarse_grid_is_numerical_error(self, tmp_path):
        # omega_a ~ 1 keeps the ledger bound tight enough that the
        # validation-ceiling step fails the 1e-8 closure
        text = """[system]
omega_a = 1.0

[pulse]
family = exponential
delta = 1.0

[grid]
t_max = 30.0
dt = 0.005
"""
        cfg = write(tmp_path, text)
        assert main(["simulate", "--config", str(cfg),
                     "--out", str(tmp_path / "o")]) == 3

    def test_sweep_without_section_is_config_error(self, tmp_path):
        cfg = write(tmp_path, BASE)
        assert main(["sweep", "--config", str(cfg),
                     "--out", str(tmp_path / "o")]) == 2


class TestSweepCommand:
    def test_rows_and_override(self, tmp_path):
        cfg = write(tmp_path, BASE + """
[sweep]
parameter = linewidth
lo = 0.5
hi = 2.0
n_points = 21
""")
        out = tmp_path / "out"
        assert main(["sweep", "--config", str(cfg), "--out", str(out),
                     "--points", "5"]) == 0
        lines = (out / "sweep.csv").read_text().splitlines()
        assert lines[1] == "value,family,objective,error"
        assert len(lines) == 2 + 5
        meta = read_meta(out / "sweep.csv")
        assert meta["n_points"] == 5
        assert meta["parameter"] == "linewidth"


class TestOptimizeCommand:
    def test_artifacts(self, tmp_path):
        cfg = write(tmp_path, BASE + """
[optimize]
parameters = detuning
detuning_lo = -1.0
detuning_hi = 1.0
budget = 60
""")
        out = tmp_path / "out"
        assert main(["optimize", "--config", str(cfg),
                     "--out", str(out)]) == 0
        doc = json.loads((out / "optimize.json").read_text())
        assert doc["converged"] is True
        assert abs(doc["params"]["detuning"]) < 1e-2
        trace_lines = (out / "trace.jsonl").read_text().splitlines()
        assert len(trace_lines) == doc["n_evals"]
        assert all("params" in json.loads(line) for line in trace_lines)

    def test_missing_section_is_config_error(self, tmp_path):
        cfg = write(tmp_path, BASE)
        assert main(["optimize", "--config", str(cfg),
                     "--out", str(tmp_path / "o")]) == 2


class TestEntropyCurveCommand:
    def test_points_and_alias(self, tmp_path):
        cfg = write(tmp_path, BASE)
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert main(["entropy-curve", "--config", str(cfg),
                     "--out", str(out1), "--points", "2"]) == 0
        lines = (out1 / "entropy_curve.csv").read_text().splitlines()
        assert lines[1] == "p_ab_infty,s_e,s_e_c"
        assert len(lines) == 2 + 2
        assert main(["figure2", "--config", str(cfg),
                     "--out", str(out2), "--points", "2"]) == 0
        assert (out1 / "entropy_curve.csv").read_bytes() == \
            (out2 / "entropy_curve.csv").read_bytes()


class TestOracleVerifyCommand:
    def test_passes_on_small_bath(self, tmp_path, capsys):
        cfg = write(tmp_path, """[system]
omega_a = 50.0

[pulse]
family = gaussian
sigma = 1.2

[mixture]
p_a0 = 0.5

[bath]
n_modes = 801
""")
        out = tmp_path / "out"
        assert main(["oracle-verify", "--config", str(cfg),
                     "--out", str(out)]) == 0
        captured = capsys.readouterr().out
        assert "oracle_agreement: pass" in captured
        assert "backward_leak: pass" in captured
        assert "adaptation_work: pass" in captured
        doc = json.loads((out / "verify.json").read_text())
        assert doc["passed"] is True
        assert doc["checks"]["backward_leak"]["leak"] <= 1e-12

    def test_coarse_bath_is_config_error(self, tmp_path):
        cfg = write(tmp_path, """[system]
omega_a = 50.0

[pulse]
family = gaussian
sigma = 1.2

[bath]
n_modes = 101
""")
        assert main(["oracle-verify", "--config", str(cfg),
                     "--out", str(tmp_path / "o")]) == 2
