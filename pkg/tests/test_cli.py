import json
import subprocess
import sys

import pytest

from rbsd import io
from rbsd.cli import run_cli


def run(capsys, *argv):
    code = run_cli(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def report(out):
    payload = json.loads(out)
    io.validate_report(payload)
    return payload


class TestGenerate:
    def test_twice_identical(self, tmp_path, capsys):
        args = ["generate", "--design", "rbsd", "--units", "4", "--steps", "4", "--p", "0.5", "--seed", "7"]
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert run(capsys, *args, "--out", str(a))[0] == 0
        assert run(capsys, *args, "--out", str(b))[0] == 0
        assert a.read_bytes() == b.read_bytes()
        assert json.loads((tmp_path / "a.csv.json").read_text())["seed"] == 7

    def test_stdout_payload(self, capsys):
        code, out, _ = run(capsys, "generate", "--design", "regular", "--units", "3", "--steps", "5",
                           "--breakpoints", "1,3", "--weights", "0.2,0.8", "--seed", "1")
        assert code == 0
        payload = report(out)
        assert payload["seed"] == 1
        assert len(payload["assignments"]) == 3

    def test_invalid_design_exit_1(self, capsys):
        code, _, err = run(capsys, "generate", "--design", "rbsd", "--units", "3", "--steps", "4")
        assert code == 1
        assert "p*N" in err


class TestValidate:
    def test_unbalanced_names_sum(self, tmp_path, capsys):
        path = tmp_path / "w.csv"
        run(capsys, "generate", "--design", "rbsd", "--units", "4", "--steps", "4", "--seed", "3", "--out", str(path))
        lines = path.read_text().splitlines()
        row = lines[1].split(",")
        row[1] = "1" if row[1] == "0" else "0"
        lines[1] = ",".join(row)
        path.write_text("\n".join(lines) + "\n")
        code, out, err = run(capsys, "validate", "--input", str(path), "--design", "rbsd")
        assert code == 1
        assert "row 1 sums to" in err and "column 1 sums to" in err
        assert report(out)["valid"] is False

    def test_valid_with_sidecar(self, tmp_path, capsys):
        path = tmp_path / "w.csv"
        run(capsys, "generate", "--design", "regular", "--units", "5", "--steps", "6",
            "--breakpoints", "1,4", "--seed", "3", "--out", str(path))
        code, out, _ = run(capsys, "validate", "--input", str(path))
        assert code == 0
        assert report(out)["valid"] is True

    def test_item_constraints(self, tmp_path, capsys):
        path = tmp_path / "w.csv"
        path.write_text("unit,t1,t2\n1,1,1\n2,1,1\n")
        code, _, err = run(capsys, "validate", "--input", str(path), "--design", "item")
        assert code == 1 and "expected 1 treated units" in err

    def test_missing_design(self, tmp_path, capsys):
        path = tmp_path / "w.csv"
        path.write_text("unit,t1\n1,1\n")
        code, _, err = run(capsys, "validate", "--input", str(path))
        assert code == 1 and "no design" in err

    def test_bad_cell(self, tmp_path, capsys):
        path = tmp_path / "w.csv"
        path.write_text("unit,t1,t2\n1,1,x\n")
        code, _, err = run(capsys, "validate", "--input", str(path), "--design", "iid")
        assert code == 1 and "line 2, column 3" in err


class TestEstimate:
    def test_round_trip_and_schema(self, tmp_path, capsys):
        w, y = tmp_path / "w.csv", tmp_path / "y.csv"
        run(capsys, "generate", "--design", "rbsd", "--units", "50", "--steps", "8", "--seed", "1", "--out", str(w))
        run(capsys, "gen-data", "--units", "50", "--steps", "8", "--seed", "2", "--out", str(y))
        code, out, _ = run(capsys, "estimate", "--assignments", str(w), "--outcomes", str(y), "--lag", "1")
        assert code == 0
        payload = report(out)
        assert payload["estimand"] == "tau_lag" and payload["n_steps_used"] == 7

        from rbsd.estimation import ht_tau_lag

        W, Y = io.read_assignment_csv(w), io.read_outcome_csv(y)
        spec, _ = io.read_sidecar(io.sidecar_path(w))
        assert payload["point"] == ht_tau_lag(W, Y, 1, spec).point

        code, out, _ = run(capsys, "estimate", "--assignments", str(w), "--outcomes", str(y), "--alpha", "0.1")
        assert code == 0 and report(out)["estimand"] == "tau"

    def test_shape_mismatch(self, tmp_path, capsys):
        w, y = tmp_path / "w.csv", tmp_path / "y.csv"
        run(capsys, "generate", "--design", "rbsd", "--units", "4", "--steps", "4", "--out", str(w))
        y.write_text("unit,t1\n1,0.5\n")
        code, _, err = run(capsys, "estimate", "--assignments", str(w), "--outcomes", str(y))
        assert code == 1 and "shape" in err


class TestProbability:
    def test_rbsd_fourteen(self, capsys):
        code, out, _ = run(capsys, "probability", "--design", "rbsd", "--steps", "14", "--p", "0.5", "--lag", "1")
        assert code == 0
        assert "0.230769" in out
        assert report(out)["p_all_control"] == pytest.approx(12 / 52)

    def test_uneven_regular_needs_step(self, capsys):
        args = ["probability", "--design", "regular", "--steps", "6", "--breakpoints", "1,4", "--weights", "0.3,0.7", "--lag", "1"]
        code, _, err = run(capsys, *args)
        assert code == 1 and "step" in err
        code, out, _ = run(capsys, *args, "--step", "4")
        assert code == 0 and report(out)["step"] == 4


class TestOptimize:
    def test_equal_gaps(self, capsys):
        code, out, _ = run(capsys, "optimize-breakpoints", "--steps", "9", "--breakpoints", "2", "--carryover", "0")
        payload = report(out)
        assert code == 0
        assert payload["breakpoints"] == [1, 4, 7] and payload["objective_value"] == 108

    def test_infeasible(self, capsys):
        code, _, err = run(capsys, "optimize-breakpoints", "--steps", "3", "--breakpoints", "3", "--carryover", "0")
        assert code == 1 and "K" in err


class TestGenData:
    def test_powerlaw(self, capsys):
        code, out, _ = run(capsys, "gen-data", "--kind", "powerlaw", "--units", "1000", "--seed", "4")
        payload = report(out)
        assert code == 0 and payload["n"] == 1000 and payload["seed"] == 4

    def test_lognormal_stdout(self, capsys):
        code, out, _ = run(capsys, "gen-data", "--units", "20", "--steps", "3")
        payload = report(out)
        assert len(payload["outcomes"]) == 20

    def test_invalid_param(self, capsys):
        code, _, err = run(capsys, "gen-data", "--zero-frac", "1.0", "--units", "5")
        assert code == 1 and "zero_frac" in err


class TestSimulate:
    def scenario(self, tmp_path, **extra):
        body = {
            "designs": [{"kind": "item"}, {"kind": "rbsd"}],
            "deltas": [0.2, 0.2],
            "reps": 5,
            "generator": {"kind": "lognormal", "units": 40, "steps": 6, "seed": 1},
            "master_seed": 3,
        }
        body.update(extra)
        path = tmp_path / "scenario.json"
        path.write_text(json.dumps(body))
        return path

    def test_report_and_replicates(self, tmp_path, capsys):
        path = self.scenario(tmp_path)
        reps = tmp_path / "reps.csv"
        code, out, _ = run(capsys, "simulate", "--scenario", str(path), "--replicates-csv", str(reps))
        assert code == 0
        payload = report(out)
        assert payload["master_seed"] == 3 and len(payload["cells"]) == 4
        lines = reps.read_text().splitlines()
        assert lines[0] == "design,replicate,estimator,estimate,std_error,p_value"
        assert len(lines) == 1 + 2 * 5 * 2

    def test_seed_flag_overrides(self, tmp_path, capsys):
        path = self.scenario(tmp_path)
        _, out, _ = run(capsys, "simulate", "--scenario", str(path), "--seed", "9")
        assert json.loads(out)["master_seed"] == 9

    def test_base_csv(self, tmp_path, capsys):
        y = tmp_path / "y.csv"
        run(capsys, "gen-data", "--units", "10", "--steps", "4", "--out", str(y))
        path = self.scenario(tmp_path, base_csv="y.csv")
        code, out, _ = run(capsys, "simulate", "--scenario", str(path))
        assert code == 0 and report(out)["base_shape"] == [10, 4]

    def test_missing_base(self, tmp_path, capsys):
        path = self.scenario(tmp_path, base_csv="nope.csv")
        code, _, err = run(capsys, "simulate", "--scenario", str(path))
        assert code == 1 and "does not exist" in err

    def test_bad_json(self, tmp_path, capsys):
        path = tmp_path / "s.json"
        path.write_text("{nope")
        assert run(capsys, "simulate", "--scenario", str(path))[0] == 1


class TestUsage:
    def test_unknown_flag(self, capsys):
        code, _, err = run(capsys, "generate", "--design", "rbsd", "--units", "2", "--steps", "2", "--bogus")
        assert code == 2 and "usage" in err

    def test_no_subcommand(self, capsys):
        assert run(capsys)[0] == 2

    def test_help(self, capsys):
        code, out, _ = run(capsys, "--help")
        assert code == 0 and "optimize-breakpoints" in out

    def test_console_script(self):
        proc = subprocess.run(
            [sys.executable, "-m", "rbsd.cli", "probability", "--design", "iid", "--steps", "3", "--lag", "1"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert json.loads(proc.stdout)["p_all_treated"] == 0.25
