"""Command-line interface: subcommands, exit codes, output formats."""

import json
import os
import subprocess
import sys

import pytest

from enbcds import (
    bundled_scenario,
    bundled_scenario_text,
    enb,
    optimal_spend,
    parse_curve_csv,
)
from enbcds.cli import main

MINIMAL = """
{
  "schema_version": 1,
  "portfolio": {
    "budget": null,
    "gdfs": [
      {"id": "solo", "ben": 100.0, "dir_costs": 10.0}
    ]
  }
}
"""


@pytest.fixture
def minimal_file(tmp_path):
    path = tmp_path / "minimal.json"
    path.write_text(MINIMAL, encoding="utf-8")
    return str(path)


@pytest.fixture
def scada_file(tmp_path):
    path = tmp_path / "remote-scada.json"
    path.write_text(bundled_scenario_text("remote-scada"), encoding="utf-8")
    return str(path)


@pytest.fixture
def comparison_file(tmp_path):
    path = tmp_path / "comparison.json"
    path.write_text(bundled_scenario_text("three-gdfs-comparison"), encoding="utf-8")
    return str(path)


class TestExitCodes:
    def test_usage_error_is_exit_2(self, minimal_file):
        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == 2
        with pytest.raises(SystemExit) as exc:
            main(["frobnicate", minimal_file])
        assert exc.value.code == 2
        with pytest.raises(SystemExit) as exc:
            main(["sample", minimal_file, "--draws", "4"])  # --seed is required
        assert exc.value.code == 2

    def test_missing_file_is_exit_1(self, tmp_path, capfd):
        code = main(["validate", str(tmp_path / "nope.json")])
        assert code == 1
        assert "error:" in capfd.readouterr().err

    def test_malformed_json_is_exit_1(self, tmp_path, capfd):
        path = tmp_path / "broken.json"
        path.write_text("{", encoding="utf-8")
        assert main(["validate", str(path)]) == 1
        assert "error:" in capfd.readouterr().err

    def test_schema_error_is_exit_1(self, tmp_path, capfd):
        path = tmp_path / "nobudget.json"
        doc = json.loads(MINIMAL)
        del doc["portfolio"]["budget"]
        path.write_text(json.dumps(doc), encoding="utf-8")
        assert main(["validate", str(path)]) == 1
        assert "budget" in capfd.readouterr().err

    def test_unknown_gdf_is_exit_1(self, minimal_file, capfd):
        assert main(["evaluate", minimal_file, "--gdf", "ghost"]) == 1
        err = capfd.readouterr().err
        assert "ghost" in err and "solo" in err


class TestValidate:
    def test_ok_output(self, minimal_file, capfd):
        assert main(["validate", minimal_file]) == 0
        assert capfd.readouterr().out == "OK\n"

    def test_json_output(self, minimal_file, capfd):
        assert main(["--json", "validate", minimal_file]) == 0
        assert json.loads(capfd.readouterr().out) == {"ok": True}

    def test_lenient_accepts_unknown_fields(self, tmp_path, capfd):
        doc = json.loads(MINIMAL)
        doc["portfolio"]["gdfs"][0]["surprise"] = 1
        path = tmp_path / "extra.json"
        path.write_text(json.dumps(doc), encoding="utf-8")
        assert main(["validate", str(path)]) == 1
        capfd.readouterr()
        import warnings

        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            assert main(["--lenient", "validate", str(path)]) == 0
        assert capfd.readouterr().out == "OK\n"


class TestEvaluate:
    def test_no_attack_gdf_prints_ben_minus_costs(self, minimal_file, capfd):
        assert main(["evaluate", minimal_file, "--gdf", "solo"]) == 0
        out = capfd.readouterr().out
        assert out == "gdf solo: enbcds(0.0) = 90.0\n"

    def test_explicit_spend_is_subtracted(self, minimal_file, capfd):
        assert main(["evaluate", minimal_file, "--gdf", "solo", "--spend", "5"]) == 0
        assert "= 85.0" in capfd.readouterr().out

    def test_json_matches_library_value(self, scada_file, capfd):
        assert main(["--json", "evaluate", scada_file, "--gdf", "remote-scada-access"]) == 0
        payload = json.loads(capfd.readouterr().out)
        sc = bundled_scenario("remote-scada")
        g = sc.portfolio.gdfs[0]
        from enbcds import EvalContext

        ctx = EvalContext(sc.portfolio, {g.id: g.actual_spend})
        assert payload["gdf"] == g.id
        assert payload["spend"] == g.actual_spend
        assert payload["enbcds"] == pytest.approx(enb(g, g.actual_spend, ctx), rel=1e-12)

    def test_literal_mode_changes_the_value(self, scada_file, capfd):
        main(["evaluate", scada_file, "--gdf", "remote-scada-access", "--spend", "100000"])
        additive = capfd.readouterr().out
        main(["evaluate", scada_file, "--gdf", "remote-scada-access", "--spend", "100000",
              "--mode", "literal"])
        literal = capfd.readouterr().out
        assert additive != literal


class TestCurve:
    def test_csv_to_stdout(self, scada_file, capfd):
        assert main(["curve", scada_file, "--gdf", "remote-scada-access", "--samples", "5"]) == 0
        out = capfd.readouterr().out
        assert out.startswith("s,enbcds")
        samples, s_star = parse_curve_csv(out)
        assert len(samples) == 5
        assert s_star is not None

    def test_output_file_written_atomically(self, scada_file, tmp_path, capfd):
        target = tmp_path / "curve.csv"
        code = main(["curve", scada_file, "--gdf", "remote-scada-access",
                     "--samples", "8", "-o", str(target)])
        assert code == 0
        assert capfd.readouterr().out == ""
        samples, _ = parse_curve_csv(target.read_bytes())
        assert len(samples) == 8
        leftovers = [n for n in os.listdir(tmp_path) if n.startswith(".enbcds-tmp-")]
        assert leftovers == []

    def test_svg_format(self, scada_file, capfd):
        assert main(["curve", scada_file, "--gdf", "remote-scada-access",
                     "--samples", "16", "--format", "svg"]) == 0
        out = capfd.readouterr().out
        assert out.startswith("<?xml")
        assert 'class="peak-marker"' in out

    def test_json_format(self, scada_file, capfd):
        assert main(["--json", "curve", scada_file, "--gdf", "remote-scada-access",
                     "--samples", "4"]) == 0
        payload = json.loads(capfd.readouterr().out)
        assert payload["gdf"] == "remote-scada-access"
        assert len(payload["samples"]) == 4
        assert payload["peak_value"] >= max(v for _, v in payload["samples"]) - 1e-9

    def test_bad_samples_value_is_exit_1(self, scada_file, capfd):
        assert main(["curve", scada_file, "--gdf", "remote-scada-access", "--samples", "1"]) == 1
        assert "error:" in capfd.readouterr().err


class TestOptimize:
    def test_matches_library_solution(self, scada_file, capfd):
        assert main(["optimize", scada_file, "--gdf", "remote-scada-access"]) == 0
        out = capfd.readouterr().out
        sc = bundled_scenario("remote-scada")
        best = optimal_spend(sc.portfolio.gdfs[0])
        assert f"s_star = {best.s_star}" in out
        assert f"value at s_star = {best.value}" in out


class TestAllocate:
    def test_comparison_table_shows_drops(self, comparison_file, capfd):
        assert main(["allocate", comparison_file]) == 0
        out = capfd.readouterr().out
        iot = next(l for l in out.splitlines() if l.startswith("consumer-iot"))
        assert "dropped" in iot
        sub = next(l for l in out.splitlines() if l.startswith("substation"))
        assert "retained" in sub
        assert "objective = " in out
        assert "kkt:" in out

    def test_zero_budget_zeroes_spends(self, comparison_file, capfd):
        assert main(["--json", "allocate", comparison_file, "--budget", "0"]) == 0
        payload = json.loads(capfd.readouterr().out)
        assert all(v == 0.0 for v in payload["spends"].values())
        assert payload["budget_used"] == 0.0

    def test_json_payload_shape(self, comparison_file, capfd):
        assert main(["--json", "allocate", comparison_file]) == 0
        payload = json.loads(capfd.readouterr().out)
        for key in ("spends", "dropped", "objective", "budget_used", "lam", "kkt", "iterations"):
            assert key in payload
        assert payload["kkt"]["zero_spend_ok"] in (True, False)


class TestSample:
    def test_deterministic_output(self, scada_file, capfd):
        args = ["sample", scada_file, "--draws", "16", "--seed", "7"]
        assert main(args) == 0
        first = capfd.readouterr().out
        assert main(args) == 0
        second = capfd.readouterr().out
        assert first == second
        assert "draws = 16, seed = 7" in first
        assert "sampled parameters" in first

    def test_json_output_parses(self, scada_file, capfd):
        assert main(["--json", "sample", scada_file, "--draws", "8", "--seed", "3"]) == 0
        payload = json.loads(capfd.readouterr().out)
        assert payload["draws"] == 8
        assert payload["param_stats"]
        assert payload["allocation_objective"] is not None

    def test_threads_flag_does_not_change_output(self, scada_file, capfd):
        base = ["sample", scada_file, "--draws", "12", "--seed", "9"]
        assert main(base) == 0
        single = capfd.readouterr().out
        assert main(base + ["--threads", "4"]) == 0
        multi = capfd.readouterr().out
        assert single == multi


class TestReport:
    def test_report_advises_dropping_iot(self, comparison_file, capfd):
        assert main(["report", comparison_file]) == 0
        out = capfd.readouterr().out
        iot = next(l for l in out.splitlines() if l.startswith("consumer-iot"))
        assert "do not deploy" in iot
        assert "total objective:" in out

    def test_plots_directory_gets_one_svg_per_gdf(self, comparison_file, tmp_path, capfd):
        plots = tmp_path / "plots"
        assert main(["report", comparison_file, "--plots", str(plots), "-o",
                     str(tmp_path / "report.txt")]) == 0
        capfd.readouterr()
        sc = bundled_scenario("three-gdfs-comparison")
        names = sorted(os.listdir(plots))
        assert names == sorted(f"{g.id}.svg" for g in sc.portfolio.gdfs)
        for name in names:
            content = (plots / name).read_bytes()
            assert content.startswith(b"<?xml")

    def test_json_report_shape(self, comparison_file, capfd):
        assert main(["--json", "report", comparison_file]) == 0
        payload = json.loads(capfd.readouterr().out)
        assert set(payload) == {"gdfs", "allocation"}
        for entry in payload["gdfs"].values():
            assert {"actual_spend", "value_at_actual", "s_star", "value"} <= set(entry)

    def test_budget_override_changes_allocation(self, comparison_file, capfd):
        assert main(["--json", "report", comparison_file, "--budget", "200000"]) == 0
        payload = json.loads(capfd.readouterr().out)
        assert payload["allocation"]["budget_used"] <= 200000.0 * (1 + 1e-9)


class TestInstalledEntryPoint:
    def test_module_invocation_round_trip(self, minimal_file):
        proc = subprocess.run(
            [sys.executable, "-m", "enbcds.cli", "validate", minimal_file],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert proc.stdout == "OK\n"
