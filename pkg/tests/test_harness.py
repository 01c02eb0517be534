#!/usr/bin/env python3
"""
Tests for the keygraph_lab command line: modes, config handling, output
formats and exit codes.
"""

import csv
import json
import os
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent.parent))

from data import MC_SIGMAS, SWEEP_COLUMNS
from keygraph import keymath
from keygraph_lab import main, validate_config_values

CONFIGS = Path(__file__).parent.parent / "configs"
FULL_ACCEPTANCE_ENV = "KEYGRAPH_LAB_FULL_ACCEPTANCE"


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def write_config(tmp_path, config):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(config), encoding="utf-8")
    return str(path)


def read_rows(text):
    return list(csv.DictReader(text.splitlines()))


class TestEval:
    def test_report(self, capsys):
        code, out, _ = run(capsys, "--mode", "eval", "--n", "2", "--K", "1", "--P", "2", "--alpha", "1")
        report = json.loads(out)
        assert code == 0
        assert report["q"] == pytest.approx(0.5)
        assert report["p"] == pytest.approx(0.5)
        assert report["first_moment"] == pytest.approx(1.0)

    def test_no_channels(self, capsys):
        code, out, _ = run(capsys, "--n", "6", "--K", "2", "--P", "9", "--alpha", "0")
        report = json.loads(out)
        assert code == 0
        assert report["lower_bound_P0"] == 0.0
        assert report["upper_bound_P0"] == pytest.approx(0.0, abs=1e-12)

    def test_ring_as_large_as_pool(self, capsys):
        code, _, err = run(capsys, "--n", "5", "--K", "4", "--P", "4", "--alpha", "0.5")
        assert code == 2
        assert "[ERROR]" in err

    def test_overflowing_r_star_is_null(self, capsys):
        code, out, _ = run(capsys, "--n", "10000", "--K", "1", "--P", "2", "--alpha", "1")
        report = json.loads(out)
        assert code == 0
        assert "Infinity" not in out
        assert report["r_star"] is None
        assert report["r_circ"] is not None

    def test_missing_parameters(self, capsys):
        code, _, err = run(capsys, "--mode", "eval", "--n", "5")
        assert code == 2
        assert "K" in err

    def test_csv(self, capsys):
        code, out, _ = run(
            capsys, "--n", "10", "--K", "2", "--P", "20", "--alpha", "0.5", "--format", "csv"
        )
        (row,) = read_rows(out)
        assert code == 0
        assert row["n"] == "10"
        assert row["alpha"] == "0.5"


class TestConfig:
    def test_validate_splits_values(self):
        result = validate_config_values(
            {"mode": "simulate", "n": 10, "alpha": 2.0, "trials": "many", "colour": 1}
        )
        assert result["valid_values"] == {"mode": "simulate", "n": 10}
        assert set(result["invalid_values"]) == {"alpha", "trials", "colour"}

    def test_simulate_needs_trials(self):
        result = validate_config_values({"mode": "simulate", "trials": 0})
        assert "trials" in result["invalid_values"]

    def test_every_invalid_value_reported(self, tmp_path, capsys):
        path = write_config(tmp_path, {"mode": "eval", "n": 0, "K": "two", "alpha": -1})
        code, out, err = run(capsys, "--config", path)
        assert code == 2
        assert out == ""
        for key in ("n:", "K:", "alpha:"):
            assert key in err

    def test_flags_override_file(self, tmp_path, capsys):
        path = write_config(tmp_path, {"mode": "eval", "n": 3, "K": 1, "P": 2, "alpha": 0.0})
        code, out, _ = run(capsys, "--config", path, "--n", "2", "--alpha", "1")
        report = json.loads(out)
        assert code == 0
        assert (report["n"], report["alpha"]) == (2, 1.0)

    def test_unreadable_config(self, tmp_path, capsys):
        path = tmp_path / "broken.json"
        path.write_text("{not json", encoding="utf-8")
        code, _, err = run(capsys, "--config", str(path))
        assert code == 2
        assert "Failed to load config" in err

    def test_csv_only_for_tables(self, capsys):
        code, _, _ = run(
            capsys, "--mode", "simulate", "--n", "5", "--K", "1", "--P", "2",
            "--alpha", "0.5", "--format", "csv",
        )
        assert code == 2

    def test_shipped_configs_are_valid(self):
        for name in ("one_law.json", "zero_law.json", "mc_check.json"):
            config = json.loads((CONFIGS / name).read_text(encoding="utf-8"))
            assert validate_config_values(config)["invalid_values"] == {}


class TestSimulate:
    ARGS = ("--mode", "simulate", "--n", "50", "--K", "4", "--P", "100", "--alpha", "0.6")

    def test_single_trial_is_stable(self, capsys):
        first = run(capsys, *self.ARGS, "--trials", "1", "--seed", "9")
        second = run(capsys, *self.ARGS, "--trials", "1", "--seed", "9")
        assert first[0] == 0
        assert first[1] == second[1]

    def test_summary_against_analytics(self, capsys):
        code, out, _ = run(capsys, *self.ARGS, "--trials", "5000", "--seed", "42")
        result = json.loads(out)
        assert code == 0
        assert result["checks"]["mean_within_sigmas"]
        assert result["checks"]["freq_within_bounds"]

        analytic = result["analytic"]
        gap = abs(result["mc_mean_I"] - analytic["first_moment"])
        assert gap <= MC_SIGMAS * result["mc_stderr_mean_I"]
        low, high = result["mc_wilson_I0"]
        assert low <= result["mc_freq_I0"] <= high

    def test_workers_do_not_change_output(self, tmp_path, capsys):
        one, eight = tmp_path / "one.json", tmp_path / "eight.json"
        run(capsys, *self.ARGS, "--trials", "400", "--workers", "1", "--out", str(one))
        run(capsys, *self.ARGS, "--trials", "400", "--workers", "8", "--out", str(eight))
        assert one.read_bytes() == eight.read_bytes()

    def test_trials_csv(self, tmp_path, capsys):
        dump = tmp_path / "trials.csv"
        code, out, _ = run(capsys, *self.ARGS, "--trials", "25", "--trials-csv", str(dump))
        rows = read_rows(dump.read_text(encoding="utf-8"))
        assert code == 0
        assert [row["trial"] for row in rows] == [str(t) for t in range(25)]
        mean = sum(int(row["isolated_count"]) for row in rows) / 25
        assert json.loads(out)["mc_mean_I"] == pytest.approx(mean)


class TestSweep:
    def test_analytic_only(self, capsys):
        code, out, _ = run(
            capsys, "--mode", "sweep", "--n-values", "800,200", "--c", "2",
            "--alpha", "1", "--K", "4", "--trials", "0",
        )
        assert code == 0
        assert out.endswith("\n")
        assert out.splitlines()[0] == ",".join(SWEEP_COLUMNS)

        rows = read_rows(out)
        assert [row["n"] for row in rows] == ["200", "800"]
        for row in rows:
            assert row["mc_freq_I0"] == row["mc_mean_I"] == row["seed"] == ""
            assert row["trials"] == "0"
            assert float(row["lower_bound_P0"]) <= float(row["upper_bound_P0"])

    def test_one_law_rows(self, capsys):
        code, out, err = run(
            capsys, "--mode", "sweep", "--n-values", "200,800", "--c", "2",
            "--alpha", "1", "--K", "4", "--trials", "200", "--seed", "42",
        )
        assert code == 0
        assert "zero law not covered" not in err
        for row in read_rows(out):
            lower = float(row["lower_bound_P0"])
            freq = float(row["mc_freq_I0"])
            assert lower > 0.9
            assert freq >= lower - MC_SIGMAS * float(row["mc_stderr_I0"])

    def test_zero_law_rows(self, capsys):
        code, out, _ = run(
            capsys, "--mode", "sweep", "--n-values", "200,800", "--c", "0.5",
            "--alpha", "1", "--K", "4", "--trials", "100", "--seed", "42",
        )
        assert code == 0
        for row in read_rows(out):
            upper = float(row["upper_bound_P0"])
            assert float(row["mc_freq_I0"]) <= upper + MC_SIGMAS * float(row["mc_stderr_I0"])

    def test_one_law_certificate(self, capsys):
        code, out, _ = run(
            capsys, "--mode", "sweep", "--n-values", "200,800,3200", "--c", "2",
            "--alpha", "1", "--K", "4", "--trials", "0",
        )
        rows = read_rows(out)
        lowers = [float(row["lower_bound_P0"]) for row in rows]
        assert code == 0
        assert rows[-1]["n"] == "3200"
        assert lowers == sorted(lowers)
        assert lowers[-1] > 0.95

    def test_zero_law_certificate(self, capsys):
        code, out, _ = run(
            capsys, "--mode", "sweep", "--n-values", "200,800,3200", "--c", "0.5",
            "--alpha", "1", "--K", "4", "--trials", "0",
        )
        rows = read_rows(out)
        assert code == 0
        assert rows[-1]["n"] == "3200"
        assert float(rows[-1]["upper_bound_P0"]) < 0.15

    def test_fixed_theta(self, capsys):
        code, out, err = run(
            capsys, "--mode", "sweep", "--dimension", "fixed", "--n-values", "100,400,1600",
            "--K", "2", "--P", "100", "--alpha", "0.5", "--trials", "0", "--format", "json",
        )
        payload = json.loads(out)
        rows = payload["rows"]
        assert code == 0
        assert {(row["K"], row["P"], row["alpha"]) for row in rows} == {(2, 100, 0.5)}

        gammas = [row["gamma_achieved"] for row in rows]
        assert gammas == sorted(gammas) and len(set(gammas)) == 3
        assert rows[-1]["lower_bound_P0"] > 0.999
        assert payload["diagnostics"]["one_law_trend"] is True
        assert "zero law not covered" not in err

    def test_fixed_theta_needs_pool(self, capsys):
        code, _, err = run(
            capsys, "--mode", "sweep", "--dimension", "fixed", "--n-values", "100",
            "--K", "2", "--alpha", "0.5", "--trials", "0",
        )
        assert code == 2
        assert "P" in err

    def test_unknown_dimension_rule(self, tmp_path, capsys):
        path = write_config(
            tmp_path,
            {"mode": "sweep", "n_values": [100], "K": 2, "c": 2.0, "dimension": "fix_alpha"},
        )
        code, _, err = run(capsys, "--config", path)
        assert code == 2
        assert "dimension" in err

    def test_workers_do_not_change_output(self, tmp_path, capsys):
        args = (
            "--mode", "sweep", "--n-values", "50,100", "--c", "1.5",
            "--alpha", "0.8", "--K", "3", "--trials", "60",
        )
        one, eight = tmp_path / "one.csv", tmp_path / "eight.csv"
        run(capsys, *args, "--workers", "1", "--out", str(one))
        run(capsys, *args, "--workers", "8", "--out", str(eight))
        assert one.read_bytes() == eight.read_bytes()

    def test_infeasible_row(self, capsys):
        code, _, err = run(
            capsys, "--mode", "sweep", "--n-values", "100", "--c", "2",
            "--alpha", "0", "--K", "4", "--trials", "0",
        )
        assert code == 3
        assert "n=100" in err

    def test_json_carries_diagnostics(self, capsys):
        code, out, err = run(
            capsys, "--mode", "sweep", "--n-values", "100,1000", "--c", "0.5",
            "--alpha", "1", "--K", "4", "--trials", "0", "--format", "json",
        )
        payload = json.loads(out)
        assert code == 0
        assert len(payload["rows"]) == 2
        assert payload["diagnostics"]["zero_law_covered"] is False
        assert "zero law not covered" in err


class TestIdentities:
    def test_small_grid(self, tmp_path, capsys):
        path = write_config(tmp_path, {"mode": "identities", "include_oracle": False})
        code, out, err = run(capsys, "--config", path, "--grid-size", "300")
        assert code == 0
        assert json.loads(out)["failures"] == []
        assert "[SUMMARY]" in err

    def test_empty_grid(self, tmp_path, capsys):
        path = write_config(
            tmp_path, {"mode": "identities", "grid_size": 0, "fixed_grids": False}
        )
        code, _, err = run(capsys, "--config", path)
        assert code == 0
        assert "0 checks" in err

    def test_injected_fault(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setattr(keymath, "q", lambda theta: keymath.v(theta, theta.K + 1))
        path = write_config(tmp_path, {"mode": "identities", "include_oracle": False})
        code, _, err = run(capsys, "--config", path, "--grid-size", "20")
        assert code == 1
        assert "q_equals_v failed" in err


class TestOracle:
    def test_single_point(self, capsys):
        code, out, _ = run(capsys, "--mode", "oracle", "--n", "3", "--K", "1", "--P", "2", "--alpha", "1")
        record = json.loads(out)
        assert code == 0
        assert record["p_no_isolated"] == 0.25
        assert record["pmf_exact"]["0"] == "1/4"

    def test_too_large(self, capsys):
        code, _, err = run(capsys, "--mode", "oracle", "--n", "6", "--K", "2", "--P", "6", "--alpha", "0.5")
        assert code == 2
        assert "enumeration" in err.lower()


@pytest.mark.skipif(
    os.environ.get(FULL_ACCEPTANCE_ENV) != "1",
    reason=f"full-size acceptance runs take minutes; set {FULL_ACCEPTANCE_ENV}=1",
)
class TestShippedConfigRuns:
    def test_mc_check(self, capsys):
        code, out, _ = run(capsys, "--config", str(CONFIGS / "mc_check.json"))
        result = json.loads(out)
        assert code == 0
        assert result["trials"] == 100000
        assert result["checks"]["mean_within_sigmas"]
        assert result["checks"]["freq_within_bounds"]

    def test_one_law(self, capsys):
        code, out, _ = run(capsys, "--config", str(CONFIGS / "one_law.json"))
        rows = read_rows(out)
        assert code == 0
        assert float(rows[-1]["lower_bound_P0"]) > 0.95
        for row in rows:
            floor = float(row["lower_bound_P0"]) - MC_SIGMAS * float(row["mc_stderr_I0"])
            assert float(row["mc_freq_I0"]) >= floor

    def test_zero_law(self, capsys):
        code, out, _ = run(capsys, "--config", str(CONFIGS / "zero_law.json"))
        rows = read_rows(out)
        assert code == 0
        assert float(rows[-1]["upper_bound_P0"]) < 0.15
        for row in rows:
            ceiling = float(row["upper_bound_P0"]) + MC_SIGMAS * float(row["mc_stderr_I0"])
            assert float(row["mc_freq_I0"]) <= ceiling


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
