import csv
import json

import pytest

from src.lab.run_experiments import EXIT_INVALID, EXIT_OK, EXIT_USAGE, main

FIXTURE = {"theta": [[0.3, 0.4], [0.0, 0.0]], "probe": {"samples": 2}}


def _config(tmp_path, data, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def _run(tmp_path, command, data, *extra, out="report.json"):
    out_path = tmp_path / out
    code = main([command, "--config", _config(tmp_path, data), "--out", str(out_path), *extra])
    return code, out_path


def test_traces_on_thrice_punctured_sphere(tmp_path):
    code, out = _run(tmp_path, "traces", {"n": 3, "basepoint": [0.5, 0.5]})
    assert code == EXIT_OK
    report = json.loads(out.read_text())
    assert report["schema_version"] == 1
    assert report["passed"]
    assert report["relation"]["kind"] == "MinusId"
    for re, im in report["peripheral_traces"]:
        assert re == pytest.approx(2.0, abs=1e-7)
        assert im == pytest.approx(0.0, abs=1e-7)
    assert sorted(report["loop_order"]) == [0, 1, 2]
    assert list(report)[-1] == "metadata"


def test_traces_are_reproducible(tmp_path):
    data = {"n": 3, "basepoint": [0.5, 0.5]}
    _, first = _run(tmp_path, "traces", data, out="a.json")
    _, second = _run(tmp_path, "traces", data, out="b.json")
    a = json.loads(first.read_text())
    b = json.loads(second.read_text())
    a.pop("metadata")
    b.pop("metadata")
    assert a == b


def test_traces_csv(tmp_path):
    code, out = _run(tmp_path, "traces", {"n": 3, "basepoint": [0.5, 0.5]}, "--format", "csv", out="traces.csv")
    assert code == EXIT_OK
    rows = list(csv.reader(out.open()))
    assert rows[0][0] == "puncture"
    assert len(rows) == 4


def test_traces_from_raw_punctures(tmp_path):
    code, out = _run(tmp_path, "traces", {"punctures": [[1, 0], [2, 0], [3, 0], [4, 0]]})
    assert code == EXIT_OK
    report = json.loads(out.read_text())
    assert report["punctures"][2] == "inf"
    assert report["theta"][0][0] == pytest.approx(-3.0)


def test_degenerate_punctures_are_a_usage_error(tmp_path):
    code, _ = _run(tmp_path, "traces", {"punctures": [[0, 0], [0, 0], [1, 0]]})
    assert code == EXIT_USAGE


def test_missing_and_malformed_config(tmp_path):
    assert main(["traces", "--config", str(tmp_path / "nope.json")]) == EXIT_USAGE
    code, _ = _run(tmp_path, "traces", {"n": "many"})
    assert code == EXIT_USAGE
    assert main(["unknown-command"]) == EXIT_USAGE


def test_validity_failure_exit_code(tmp_path):
    data = {"n": 3, "basepoint": [0.5, 0.5], "settings": {"parabolic_tol": 1e-30}}
    code, out = _run(tmp_path, "traces", data)
    assert code == EXIT_INVALID
    report = json.loads(out.read_text())
    assert not report["passed"]
    assert report["failures"][0].startswith("parabolicity")


def test_numerical_failure_inside_foliation_exit_code(tmp_path):
    data = {"n": 3, "basepoint": [0.5, 0.5], "settings": {"parabolic_tol": 1e-30},
            "foliation": {"leaves": 5, "section_depths": 4}}
    code, _ = _run(tmp_path, "foliation", data)
    assert code == EXIT_INVALID


def test_jacobian_on_thrice_punctured_sphere(tmp_path):
    code, out = _run(tmp_path, "jacobian", {"n": 3})
    assert code == EXIT_OK
    report = json.loads(out.read_text())
    assert report["zero_dimensional"]
    assert report["expected_rank"] == 0


def test_jacobian_on_four_punctured_fixture(tmp_path):
    code, out = _run(tmp_path, "jacobian", FIXTURE)
    assert code == EXIT_OK
    report = json.loads(out.read_text())
    assert report["rank"] == 2
    assert report["fiber_rank"] == 1
    assert report["injectivity_violations"] == 0
    assert report["condition_ratio"] > 1e-6


def test_jacobian_rank_deficit_exit_code(tmp_path):
    data = dict(FIXTURE, settings={"rank_threshold": 0.999}, probe={"samples": 0})
    code, out = _run(tmp_path, "jacobian", data)
    assert code == EXIT_INVALID
    assert json.loads(out.read_text())["rank"] < 2


def test_jacobian_csv_has_theta_and_singular_values(tmp_path):
    code, out = _run(tmp_path, "jacobian", FIXTURE, "--format", "csv", out="jacobian.csv")
    assert code == EXIT_OK
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 1
    row = rows[0]
    assert [float(row[key]) for key in ("theta0_re", "theta0_im", "theta1_re", "theta1_im")] == [0.3, 0.4, 0.0, 0.0]
    assert float(row["sigma0"]) >= float(row["sigma1"]) > 0
    assert row["rank"] == "2"
    assert row["injectivity_exhausted"] == "0"


def test_scan_of_empty_grid(tmp_path):
    code, out = _run(tmp_path, "scan", {"n": 4}, "--no-cache", out="scan.csv")
    assert code == EXIT_OK
    rows = list(csv.reader(out.open()))
    assert len(rows) == 1
    assert rows[0][:3] == ["index", "theta0_re", "theta0_im"]


def test_scan_flags_degenerate_points(tmp_path):
    data = {"n": 4, "grid": {"points": [[[1.0, 0.0], [0.0, 0.0]]]}}
    code, out = _run(tmp_path, "scan", data, "--format", "json", "--no-cache")
    assert code == EXIT_OK
    rows = json.loads(out.read_text())["rows"]
    assert len(rows) == 1
    assert rows[0]["flagged"]
    assert rows[0]["error"].startswith("DegenerateConfiguration")


def test_scan_star_grid_resumes_from_cache(tmp_path):
    data = {"n": 4, "grid": {"star": {"center": [[0.3, 0.4], [0.0, 0.0]]}}}
    cache_dir = str(tmp_path / "cache")
    code, first = _run(tmp_path, "scan", data, "--format", "csv", "--cache-dir", cache_dir, out="first.csv")
    assert code == EXIT_OK
    rows = list(csv.DictReader(first.open()))
    assert len(rows) == 5
    assert [int(row["index"]) for row in rows] == [0, 1, 2, 3, 4]
    assert all(row["rank"] == "2" and row["flagged"] == "False" for row in rows)
    assert len(list((tmp_path / "cache").glob("*.json"))) == 5

    code, second = _run(tmp_path, "scan", data, "--format", "csv", "--cache-dir", cache_dir, out="second.csv")
    assert code == EXIT_OK
    assert second.read_text() == first.read_text()


def test_foliation_checks(tmp_path):
    data = {"n": 3, "basepoint": [0.5, 0.5], "foliation": {"leaves": 10, "section_depths": 4}}
    code, out = _run(tmp_path, "foliation", data)
    assert code == EXIT_OK
    report = json.loads(out.read_text())
    assert report["passed"]
    assert [entry["windings"] for entry in report["winding_sweep"]] == [-2, -1, 0, 1, 2]
    for entry in report["winding_sweep"]:
        assert entry["closed_form_shift"] == [-entry["windings"], 0.0]
        assert entry["numeric_residual"] < 1e-9
    assert report["diagonal_max_v"] == 0
    assert len(report["section_probes"]) == 2
