import json

import pytest
from click.testing import CliRunner

from rollgeo.cli import main


@pytest.fixture()
def runner():
    return CliRunner()


def _run(runner, *args):
    return runner.invoke(main, list(args), catch_exceptions=False)


class TestCatalog:
    def test_list_names_everything(self, runner):
        result = _run(runner, "catalog", "list")
        assert result.exit_code == 0
        for name in ("sphere-on-plane-pendulum", "heisenberg-lift",
                     "sphere-on-plane-bvp", "theorem-2-4", "first-integrals"):
            assert name in result.output

    def test_show_round_trips_json(self, runner):
        result = _run(runner, "catalog", "show", "sphere-on-plane-geodesic")
        assert result.exit_code == 0
        record = json.loads(result.output)
        assert record["kind"] == "geodesic"
        assert record["chart"] == "sphere(1)"

    def test_show_unknown_is_validation_error(self, runner):
        result = _run(runner, "catalog", "show", "no-such-scenario")
        assert result.exit_code == 3
        assert "available" in result.output


class TestRunErrors:
    def test_malformed_file_is_parse_error(self, runner, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{"kind": "geodesic",\n  broken')
        result = _run(runner, "run", str(bad))
        assert result.exit_code == 2
        assert "line" in result.output

    def test_unknown_name_is_parse_error(self, runner):
        result = _run(runner, "run", "no-such-scenario")
        assert result.exit_code == 2

    def test_missing_field_is_validation_error(self, runner, tmp_path):
        partial = tmp_path / "partial.json"
        partial.write_text(json.dumps({"kind": "geodesic", "chart": "sphere(1)"}))
        result = _run(runner, "run", str(partial))
        assert result.exit_code == 3
        assert "requires field" in result.output

    def test_equal_curvature_pendulum_is_validation_error(self, runner, tmp_path):
        flat = tmp_path / "flat.json"
        flat.write_text(json.dumps({
            "kind": "pendulum-2d", "chart": "euclidean(2)",
            "chart_hat": "euclidean(2)", "x": [0.0, 0.0], "xhat": [0.0, 0.0],
            "theta": 0.3, "L": 0.1, "b1": 0.0, "b2": 0.0, "a": 1.0, "T": 1.0,
        }))
        result = _run(runner, "run", str(flat))
        assert result.exit_code == 3
        assert "bracket-generating" in result.output

    def test_truncation_is_numerical_error_with_artifacts(self, runner, tmp_path):
        scenario = tmp_path / "poleward.json"
        scenario.write_text(json.dumps({
            "kind": "geodesic", "chart": "sphere(1)",
            "chart_hat": "euclidean(2)", "x": [0.3, 0.0], "xhat": [0.0, 0.0],
            "u": [-1.0, 0.0], "v": [0.0, 0.0], "ell": 0.0, "T": 2.0,
        }))
        out = tmp_path / "out"
        result = _run(runner, "run", str(scenario), "--output-dir", str(out),
                      "--samples", "20")
        assert result.exit_code == 4
        summary = json.loads((out / "poleward.summary.json").read_text())
        assert summary["status"] == "truncated"
        assert (out / "poleward.csv").exists()


class TestRunArtifacts:
    def test_pendulum_scenario_passes(self, runner, tmp_path):
        result = _run(runner, "run", "sphere-on-plane-pendulum", "--T", "2",
                      "--output-dir", str(tmp_path), "--samples", "40")
        assert result.exit_code == 0
        summary = json.loads(
            (tmp_path / "sphere-on-plane-pendulum.summary.json").read_text())
        assert summary["status"] == "ok"
        assert summary["invariants"]["pendulum_residual"] <= 1e-6
        assert summary["artifact_version"]
        assert len(summary["scenario_sha256"]) == 64
        assert "integrator" in summary["tolerances"]
        csv = (tmp_path / "sphere-on-plane-pendulum.csv").read_text()
        header, *rows = csv.strip().splitlines()
        assert header.split(",")[:5] == ["t", "x1", "x2", "xhat1", "xhat2"]
        assert len(rows) == 40

    def test_reruns_are_byte_identical(self, runner, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            result = _run(runner, "run", "sphere-on-plane-pendulum", "--T", "2",
                          "--output-dir", str(out), "--samples", "40")
            assert result.exit_code == 0
        name = "sphere-on-plane-pendulum"
        assert (a / f"{name}.csv").read_bytes() == (b / f"{name}.csv").read_bytes()
        assert (a / f"{name}.summary.json").read_bytes() == \
            (b / f"{name}.summary.json").read_bytes()

    def test_json_table_format(self, runner, tmp_path):
        result = _run(runner, "run", "sphere-great-circle-develop", "--T", "1",
                      "--output-dir", str(tmp_path), "--format", "json",
                      "--samples", "10")
        assert result.exit_code == 0
        table = json.loads(
            (tmp_path / "sphere-great-circle-develop.table.json").read_text())
        assert table["header"][0] == "t"
        assert len(table["rows"]) == 10


class TestVerify:
    def test_unknown_suite_lists_available(self, runner):
        result = _run(runner, "verify", "no-such-suite")
        assert result.exit_code == 3
        assert "first-integrals" in result.output
        assert "theorem-2-4" in result.output

    def test_first_integrals_report(self, runner, tmp_path):
        result = _run(runner, "verify", "first-integrals",
                      "--output-dir", str(tmp_path))
        assert result.exit_code == 0
        report = json.loads(result.output)
        assert report["passed"] is True
        assert all(c["speed_drift"] <= 1e-8 for c in report["cases"])
        on_disk = json.loads(
            (tmp_path / "first-integrals.report.json").read_text())
        assert on_disk == report
