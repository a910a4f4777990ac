import json
import math
from pathlib import Path

import pytest
from click.testing import CliRunner

from curvetorsion.cli import main
from curvetorsion.curves import CurveGamma
from curvetorsion.reports import svg_region_map

from conftest import poly

pytestmark = pytest.mark.usefixtures("moment_curve")

RUNNER = CliRunner()

try:
    import jsonschema

    HAVE_JSONSCHEMA = True
except ImportError:  # pragma: no cover
    HAVE_JSONSCHEMA = False

SCHEMA_DIR = Path(__file__).resolve().parents[1] / "schemas"


def write_curve(tmp_path, curve, name="curve.json"):
    path = tmp_path / name
    path.write_text(json.dumps(curve.to_json()))
    return path


def validate(payload, schema_name):
    if not HAVE_JSONSCHEMA:
        pytest.skip("jsonschema not installed")
    schema = json.loads((SCHEMA_DIR / schema_name).read_text())
    jsonschema.validate(payload, schema)


class TestAnalyze:
    def test_moment_outputs(self, tmp_path, moment_curve):
        curve_file = write_curve(tmp_path, moment_curve)
        out = tmp_path / "out"
        res = RUNNER.invoke(main, ["analyze", str(curve_file), "--seed", "7",
                                   "--samples", "300", "--out", str(out)])
        assert res.exit_code == 0, res.output
        decomposition = json.loads((out / "decomposition.json").read_text())
        assert decomposition["region_count"] == 1
        assert decomposition["regions"][0]["region_type"] == "T11"
        validate(decomposition, "decomposition.schema.json")
        verification = json.loads((out / "verification.json").read_text())
        assert len(verification["reports"]) == 1
        validate(verification, "verification.schema.json")
        assert (out / "regions.svg").exists()

    def test_degenerate_curve_exit_3_no_outputs(self, tmp_path):
        curve = CurveGamma.from_components(poly(0, 1), poly(0, 0, 1), poly(0))
        curve_file = write_curve(tmp_path, curve)
        out = tmp_path / "out"
        res = RUNNER.invoke(main, ["analyze", str(curve_file), "--seed", "1",
                                   "--out", str(out)])
        assert res.exit_code == 3
        payload = json.loads(res.output)
        assert payload["error"]["type"] == "DegenerateTorsion"
        validate(payload, "error.schema.json")
        assert not out.exists() or not list(out.iterdir())

    def test_missing_file_usage_error(self, tmp_path):
        res = RUNNER.invoke(main, ["analyze", str(tmp_path / "nope.json"), "--seed", "1"])
        assert res.exit_code == 2

    def test_malformed_json_exit_3(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        res = RUNNER.invoke(main, ["analyze", str(bad), "--seed", "1"])
        assert res.exit_code == 3

    def test_inadmissible_regions_skipped_without_retry(self, tmp_path):
        # L1 = 1 + 2z puts type-T10 layers with k1 = 1 into the report
        curve = CurveGamma.from_components(poly(0, 1, 1), poly(0, 0, 0, 1), poly(0, 0, -100))
        curve_file = write_curve(tmp_path, curve)
        out = tmp_path / "out"
        eps = 2 * math.pi / 28  # coarse sectors keep this test quick
        res = RUNNER.invoke(main, ["analyze", str(curve_file), "--seed", "2",
                                   "--samples", "20", "--no-retry",
                                   "--eps", repr(eps), "--out", str(out)])
        assert res.exit_code == 0, res.output
        verification = json.loads((out / "verification.json").read_text())
        assert verification["skipped"]
        assert all(s["reason"] == "inadmissible" for s in verification["skipped"])
        skipped_ids = {s["region_id"] for s in verification["skipped"]}
        reported_ids = {r["region_id"] for r in verification["reports"]}
        assert not (skipped_ids & reported_ids)

    def test_env_var_output_dir(self, tmp_path, monkeypatch):
        target = tmp_path / "envout"
        monkeypatch.setenv("CURVETORSION_OUT", str(target))
        res = RUNNER.invoke(main, ["operator", "ball-measure", "--k-prime", "1", "--x", "2"])
        assert res.exit_code == 0
        assert (target / "ball_measure.json").exists()


class TestJacobianCheck:
    def test_moment_all_pass(self, tmp_path, moment_curve):
        curve_file = write_curve(tmp_path, moment_curve)
        out = tmp_path / "out"
        res = RUNNER.invoke(main, ["jacobian-check", str(curve_file), "--trials", "100",
                                   "--seed", "3", "--out", str(out)])
        assert res.exit_code == 0, res.output
        payload = json.loads((out / "jacobian_check.json").read_text())
        assert payload["passes"] == 100
        assert payload["failures"] == 0
        assert payload["worst_relative_deviation"] < 1e-10
        validate(payload, "jacobian_check.schema.json")

    def test_singular_segments_logged(self, tmp_path, curve_z3z5):
        # L2 = 6z vanishes at the origin inside the sampling box, so some
        # triples are excluded and logged while the rest still pass
        curve_file = write_curve(tmp_path, curve_z3z5)
        out = tmp_path / "out"
        res = RUNNER.invoke(main, ["jacobian-check", str(curve_file), "--trials", "40",
                                   "--seed", "5", "--out", str(out)])
        assert res.exit_code == 0, res.output
        payload = json.loads((out / "jacobian_check.json").read_text())
        assert payload["excluded_count"] > 0
        assert payload["passes"] == 40

    def test_zero_trials_usage_error(self, tmp_path, moment_curve):
        curve_file = write_curve(tmp_path, moment_curve)
        res = RUNNER.invoke(main, ["jacobian-check", str(curve_file), "--trials", "0",
                                   "--seed", "3"])
        assert res.exit_code == 2


class TestOperatorCommands:
    def test_ball_measure_prints_exact_value(self, tmp_path):
        res = RUNNER.invoke(main, ["operator", "ball-measure", "--k-prime", "0",
                                   "--x", "1", "--out", str(tmp_path)])
        assert res.exit_code == 0
        assert res.output.strip() == "0.125 vs target 0.125"
        payload = json.loads((tmp_path / "ball_measure.json").read_text())
        validate(payload, "ball_measure.schema.json")

    def test_pairing_report(self, tmp_path, moment_curve):
        curve_file = write_curve(tmp_path, moment_curve)
        res = RUNNER.invoke(main, ["operator", "pairing", str(curve_file),
                                   "--seed", "5", "--n-mc", "5000",
                                   "--out", str(tmp_path)])
        assert res.exit_code == 0, res.output
        payload = json.loads((tmp_path / "weaktype.json").read_text())
        rep = payload["report"]
        assert rep["pairing"] == pytest.approx(rep["alpha"] * rep["volume_f"])
        assert rep["pairing"] == pytest.approx(rep["beta"] * rep["volume_e"])
        validate(payload, "weaktype.schema.json")

    def test_scan_csv_rows(self, tmp_path, moment_curve):
        curve_file = write_curve(tmp_path, moment_curve)
        res = RUNNER.invoke(main, ["operator", "scan", str(curve_file),
                                   "--theta", "0.25,0.5,0.75",
                                   "--grid-points", "2", "--grid-half-width", "2.0",
                                   "--n-quad", "8", "--out", str(tmp_path)])
        assert res.exit_code == 0, res.output
        lines = (tmp_path / "scan.csv").read_text().strip().splitlines()
        assert len(lines) == 1 + 3 * 3  # header + (theta x functions)
        payload = json.loads((tmp_path / "scan.json").read_text())
        validate(payload, "scan.schema.json")

    def test_extension_endpoint(self, tmp_path, moment_curve):
        curve_file = write_curve(tmp_path, moment_curve)
        res = RUNNER.invoke(main, ["operator", "extension-endpoint", str(curve_file),
                                   "--seed", "2", "--points", "10", "--n-quad", "12",
                                   "--out", str(tmp_path)])
        assert res.exit_code == 0, res.output
        payload = json.loads((tmp_path / "extension_endpoint.json").read_text())
        assert payload["violations"] == 0


class TestReplay:
    def test_replay_matches(self, tmp_path, moment_curve):
        curve_file = write_curve(tmp_path, moment_curve)
        out = tmp_path / "out"
        res = RUNNER.invoke(main, ["analyze", str(curve_file), "--seed", "7",
                                   "--samples", "200", "--out", str(out)])
        assert res.exit_code == 0
        verification = json.loads((out / "verification.json").read_text())
        region_id = verification["reports"][0]["region_id"]
        res = RUNNER.invoke(main, ["replay", str(out / "verification.json"),
                                   "--region-id", region_id])
        assert res.exit_code == 0, res.output
        assert json.loads(res.output)["match"] is True


class TestSvg:
    def test_one_path_per_region(self, suite_reports):
        _, _, rep = suite_reports["z2z4"]
        svg = svg_region_map(rep)
        assert svg.count("<path") == rep.region_count
        for tag in ("<circle", "<rect", "<text", "<g>"):
            assert tag not in svg
        assert "data-sigma" in svg
