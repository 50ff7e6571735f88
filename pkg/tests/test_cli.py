import json
import math
from fractions import Fraction

import pytest
from click.testing import CliRunner

from syncq.cli import main


@pytest.fixture
def runner():
    return CliRunner()


def _strip_timestamp(text: str) -> str:
    return "\n".join(
        line
        for line in text.splitlines()
        if not line.startswith("# timestamp:") and '"timestamp"' not in line
    )


class TestSeriesCommand:
    def test_csv_to_stdout(self, runner):
        result = runner.invoke(main, ["series", "--d", "2", "--p", "1/2", "--n-max", "3"])
        assert result.exit_code == 0, result.output
        lines = result.output.splitlines()
        assert lines[0].startswith("# syncq-series csv-schema v1")
        assert "n,r,inv_r,partial_sum,r_exact,inv_r_exact,partial_sum_exact" in lines
        assert any(line.startswith("2,0.375,") and ",3/8," in line for line in lines)

    def test_d1_rows_all_one(self, runner):
        result = runner.invoke(main, ["series", "--d", "1", "--p", "1/3", "--n-max", "5"])
        assert result.exit_code == 0
        data_lines = [l for l in result.output.splitlines() if l and not l.startswith("#")][1:]
        for line in data_lines:
            fields = line.split(",")
            assert fields[1] == "1.0" and fields[4] == "1"

    def test_file_output_and_rerun_identical(self, runner, tmp_path):
        out = tmp_path / "series.csv"
        args = ["series", "--d", "3", "--p", "1/2", "--n-max", "10", "--output", str(out)]
        assert runner.invoke(main, args).exit_code == 0
        first = out.read_text()
        assert runner.invoke(main, args).exit_code == 0
        second = out.read_text()
        assert first != second  # timestamp line moves
        assert _strip_timestamp(first) == _strip_timestamp(second)

    def test_json_format(self, runner, tmp_path):
        out = tmp_path / "series.json"
        args = [
            "series", "--d", "2", "--p", "0.5", "--n-max", "4",
            "--format", "json", "--output", str(out),
        ]
        assert runner.invoke(main, args).exit_code == 0
        body = json.loads(out.read_text())
        assert body["config"]["subcommand"] == "series"
        assert body["config"]["p"] == "0.5"
        assert body["rows"][4]["r_exact"] == "35/128"
        # timestamp occupies its own line in the rendered file
        assert sum(1 for line in out.read_text().splitlines() if '"timestamp"' in line) == 1

    def test_fig2_preset(self, runner, tmp_path):
        out_dir = tmp_path / "fig2"
        result = runner.invoke(main, ["series", "--fig2", "--output", str(out_dir)])
        assert result.exit_code == 0, result.output
        files = sorted(p.name for p in out_dir.iterdir())
        assert files == ["fig2_d2.csv", "fig2_d3.csv", "fig2_d4.csv", "fig2_d5.csv"]
        rows = (out_dir / "fig2_d2.csv").read_text().splitlines()
        last = rows[-1].split(",")
        assert last[0] == "40"
        assert Fraction(last[5]) == Fraction(4**40, math.comb(80, 40))

    def test_validation_exit_code(self, runner):
        result = runner.invoke(main, ["series", "--d", "2", "--p", "nonsense", "--n-max", "3"])
        assert result.exit_code == 2

    def test_guard_exit_code(self, runner):
        result = runner.invoke(
            main, ["series", "--d", "2", "--p", "1/2", "--n-max", "4000", "--backend", "exact"]
        )
        assert result.exit_code == 3

    def test_guard_override(self, runner):
        result = runner.invoke(
            main,
            ["series", "--d", "2", "--p", "1/2", "--n-max", "20", "--work-limit", "5"],
        )
        assert result.exit_code == 3


class TestDriftScanCommand:
    def test_json_report(self, runner, tmp_path):
        out = tmp_path / "drift.json"
        result = runner.invoke(
            main,
            ["drift-scan", "--radius", "10", "--format", "json", "--output", str(out)],
        )
        assert result.exit_code == 0, result.output
        body = json.loads(out.read_text())
        assert body["rho0"] == "6"
        assert body["stable_under_doubling"] is True
        assert [0, 0, 0] in [e["state"] for e in body["exceptional_states"]]

    def test_per_state_csv(self, runner, tmp_path):
        out = tmp_path / "drift.csv"
        result = runner.invoke(
            main,
            ["drift-scan", "--radius", "4", "--emit-per-state", "--output", str(out)],
        )
        assert result.exit_code == 0
        lines = out.read_text().splitlines()
        assert lines[0].startswith("# syncq-drift-scan csv-schema v1 columns=x1,x2,x3,rho,drift")
        data = [l for l in lines if l and not l.startswith("#")][1:]
        assert data[0].split(",")[:4] == ["0", "0", "0", "0"]

    def test_d_is_pinned_to_three(self, runner):
        # the scan has no --d flag; the service contract fixes d = 3
        result = runner.invoke(main, ["drift-scan", "--radius", "4", "--d", "4"])
        assert result.exit_code == 2

    def test_guard_exit(self, runner):
        result = runner.invoke(main, ["drift-scan", "--radius", "5000"])
        assert result.exit_code == 3

    def test_unstable_doubling_exit(self, runner, tmp_path):
        # a radius-1 scan misses part of the exceptional set, so doubling
        # the radius grows it; the report is still written, exit code is 4
        out = tmp_path / "tiny.json"
        result = runner.invoke(
            main,
            ["drift-scan", "--radius", "1", "--format", "json", "--output", str(out)],
        )
        assert result.exit_code == 4
        body = json.loads(out.read_text())
        assert body["stable_under_doubling"] is False
        assert set(body["conditions"]) == {
            "sublevel_sets_finite",
            "drift_bounded",
            "negative_outside_exceptional",
        }


class TestSimulateCommand:
    def test_simulate_and_rerun(self, runner, tmp_path):
        out = tmp_path / "sim.csv"
        args = [
            "simulate", "--d", "2", "--p", "1/4", "--mbar", "1/2",
            "--T", "1000", "--seed", "1", "--output", str(out),
        ]
        assert runner.invoke(main, args).exit_code == 0
        first = out.read_text()
        assert runner.invoke(main, args).exit_code == 0
        assert _strip_timestamp(first) == _strip_timestamp(out.read_text())
        assert any(line.startswith("excess_digest,") for line in first.splitlines())

    def test_q0_parsing(self, runner):
        result = runner.invoke(
            main,
            ["simulate", "--d", "2", "--p", "1/4", "--mbar", "1/2", "--T", "10", "--q0", "3,1"],
        )
        assert result.exit_code == 0
        bad = runner.invoke(
            main,
            ["simulate", "--d", "2", "--p", "1/4", "--mbar", "1/2", "--T", "10", "--q0", "a,b"],
        )
        assert bad.exit_code == 2

    def test_unstable_params_rejected(self, runner):
        result = runner.invoke(
            main, ["simulate", "--d", "2", "--p", "1/2", "--mbar", "1/4", "--T", "10"]
        )
        assert result.exit_code == 2


class TestEstimateReturnCommand:
    def test_csv(self, runner):
        result = runner.invoke(
            main,
            ["estimate-return", "--d", "2", "--p", "1/2", "--n-max", "2",
             "--trials", "20000", "--seed", "7"],
        )
        assert result.exit_code == 0
        lines = [l for l in result.output.splitlines() if l and not l.startswith("#")]
        assert lines[0] == "n,estimate,std_error,returns,trials"
        n0 = lines[1].split(",")
        assert n0[1] == "1.0"


class TestVisitGrowthCommand:
    def test_csv(self, runner):
        result = runner.invoke(
            main,
            ["visit-growth", "--d", "2", "--p", "1/2", "--T", "2000",
             "--trials", "4", "--seed", "3"],
        )
        assert result.exit_code == 0
        assert "# mean_visits_horizon:" in result.output
        data = [l for l in result.output.splitlines() if l and not l.startswith("#")]
        assert data[0] == "trial,visits_horizon,visits_double"
        assert len(data) == 5
