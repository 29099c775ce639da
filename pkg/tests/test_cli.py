import csv
import json

import pytest

from rismesh.cli import main


def read_csv(path):
    lines = path.read_text().splitlines()
    assert lines[0] == "# format_version=1"
    return list(csv.DictReader(lines[1:]))


def run(*args):
    return main([str(a) for a in args])


def test_gen_scenario(tmp_path):
    assert run("gen-scenario", "--out", tmp_path) == 0
    data = json.loads((tmp_path / "scenario.json").read_text())
    kinds = [n["kind"] for n in data["nodes"]]
    assert {k: kinds.count(k) for k in set(kinds)} == {"BS": 7, "RIS": 28, "RN": 28, "UE": 7}


def test_gen_scenario_repeatable(tmp_path):
    run("gen-scenario", "--seed", 4, "--out", tmp_path / "a")
    run("gen-scenario", "--seed", 4, "--out", tmp_path / "b")
    assert (tmp_path / "a/scenario.json").read_bytes() == (tmp_path / "b/scenario.json").read_bytes()


def test_config_errors(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"box": [0, 32, 32]}))
    assert run("gen-scenario", "--config", cfg, "--out", tmp_path) == 2
    cfg.write_text(json.dumps({"bogus": 1}))
    assert run("solve", "--config", cfg, "--out", tmp_path) == 2
    cfg.write_text("{not json")
    assert run("solve", "--config", cfg, "--out", tmp_path) == 2
    cfg.write_text(json.dumps({"demand_counts": [5, 3]}))
    assert run("solve", "--config", cfg, "--out", tmp_path) == 2
    assert run("solve", "--k", 0, "--out", tmp_path) == 2


def test_io_error(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert run("gen-scenario", "--out", blocker / "sub") == 4
    assert run("solve", "--scenario", tmp_path / "missing.json", "--out", tmp_path) == 4


def test_infeasible_exit_code(tmp_path):
    cfg = tmp_path / "c.json"
    # one BS/UE pair far apart, nothing to relay through
    cfg.write_text(json.dumps({"counts": {"BS": 1, "RIS": 0, "RN": 0, "UE": 1}, "box": [200, 200, 200],
                               "max_path_reach": 1.0, "demand_counts": [3]}))
    assert run("solve", "--config", cfg, "--out", tmp_path) == 3


def test_beam_analysis(tmp_path):
    assert run("beam-analysis", "--out", tmp_path) == 0
    rows = read_csv(tmp_path / "beam_analysis.csv")
    dist = [r for r in rows if r["sweep"] == "distance"]
    assert len(dist) == 20 and len(rows) == 40
    row4 = next(r for r in dist if float(r["sweep_var"]) == 4.0)
    assert float(row4["footprint_area"]) == pytest.approx(0.0958178, rel=1e-4)
    assert all(float(v) > 0 for k, v in dist[0].items() if k != "sweep")


def test_interference_analysis(tmp_path):
    assert run("interference-analysis", "--out", tmp_path) == 0
    rows = read_csv(tmp_path / "interference_analysis.csv")
    assert [int(r["interferer_angle"]) for r in rows] == list(range(1, 46))
    assert float(rows[-1]["snir_ris_db"]) >= float(rows[-1]["snir_node_db"])


def test_solve_outputs(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"demand_counts": [0, 25, 65]}))
    assert run("solve", "--config", cfg, "--seed", 1, "--out", tmp_path) == 0
    rows = read_csv(tmp_path / "throughput.csv")
    assert list(rows[0]) == ["demand_count", "method", "lambda", "gain"]
    assert rows[0]["lambda"] == "unbounded" and rows[0]["gain"] == "undefined"
    assert {r["method"] for r in rows} == {"DDP-LI", "DDP-SP"}
    sols = json.loads((tmp_path / "solutions.json").read_text())
    assert len(sols) == 6 and sols[0]["lambda"] == "unbounded"
    sets = json.loads((tmp_path / "conflict_sets.json").read_text())
    assert sets and "labels" in sets[0]["members"][0]


def test_timings_column(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"demand_counts": [5]}))
    assert run("solve", "--config", cfg, "--out", tmp_path, "--timings") == 0
    assert "wall_time" in read_csv(tmp_path / "throughput.csv")[0]


def test_nine_significant_digits(tmp_path):
    run("beam-analysis", "--out", tmp_path)
    rows = read_csv(tmp_path / "beam_analysis.csv")
    digits = [len(v.split("e")[0].replace(".", "").replace("-", "").lstrip("0")) for v in rows[5].values()
              if "." in v]
    assert max(digits) <= 9
