import csv
import json
import math

import numpy as np
import pytest

from rinlab.bench import CSV_HEADER, run_benchmark
from rinlab.cli import main
from rinlab.rin import DistanceCriterion, RinConfig
from rinlab.synth import walk_trajectory


@pytest.fixture(scope="module")
def traj_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "walk.json"
    assert main(["synth", "--kind", "walk", "--residues", "40", "--frames", "3",
                 "--seed", "2", "--out", str(path)]) == 0
    return path


@pytest.fixture(scope="module")
def graph_file(tmp_path_factory, traj_file):
    path = tmp_path_factory.mktemp("graphs") / "rin.json"
    assert main(["build", "--input", str(traj_file), "--criterion", "min",
                 "--cutoff", "4.5", "--out", str(path)]) == 0
    return path


class TestBuild:
    def test_json_graph_output(self, graph_file):
        doc = json.loads(graph_file.read_text())
        assert doc["n"] == 40
        assert doc["config"]["criterion"] == "min"
        assert doc["config"]["cutoff"] == 4.5

    def test_graphml_by_extension(self, tmp_path, traj_file):
        out = tmp_path / "rin.graphml"
        assert main(["build", "--input", str(traj_file), "--cutoff", "5.0",
                     "--out", str(out)]) == 0
        assert out.read_text().startswith("<?xml")

    def test_frame_selection(self, tmp_path, traj_file):
        a = tmp_path / "f0.json"
        b = tmp_path / "f2.json"
        main(["build", "--input", str(traj_file), "--cutoff", "4.5", "--out", str(a)])
        main(["build", "--input", str(traj_file), "--cutoff", "4.5", "--frame", "2",
              "--out", str(b)])
        assert json.loads(a.read_text())["frame"] == 0
        assert json.loads(b.read_text())["frame"] == 2
        assert json.loads(a.read_text())["edges"] != json.loads(b.read_text())["edges"]


class TestAnalyze:
    @pytest.mark.parametrize("measure", ["degree", "closeness", "betweenness",
                                         "pagerank", "pagerank-norm"])
    def test_scalar_measures(self, tmp_path, graph_file, measure):
        out = tmp_path / f"{measure}.json"
        assert main(["analyze", "--graph", str(graph_file), "--measure", measure,
                     "--out", str(out)]) == 0
        doc = json.loads(out.read_text())
        assert doc["measure"] == measure
        assert len(doc["values"]) == 40

    @pytest.mark.parametrize("measure", ["plm", "leiden"])
    def test_community_measures(self, tmp_path, graph_file, measure):
        out = tmp_path / f"{measure}.json"
        assert main(["analyze", "--graph", str(graph_file), "--measure", measure,
                     "--gamma", "1.0", "--out", str(out)]) == 0
        doc = json.loads(out.read_text())
        assert len(doc["labels"]) == 40
        assert doc["community_count"] >= 1


class TestLayout:
    def test_layout_and_warm_start(self, tmp_path, graph_file):
        cold = tmp_path / "cold.json"
        warm = tmp_path / "warm.json"
        assert main(["layout", "--graph", str(graph_file), "--seed", "3",
                     "--out", str(cold)]) == 0
        doc = json.loads(cold.read_text())
        assert doc["kind"] == "maxent"
        assert len(doc["coords"]) == 40
        assert doc["params"]["seed"] == 3
        assert main(["layout", "--graph", str(graph_file), "--warm", str(cold),
                     "--out", str(warm)]) == 0
        warm_doc = json.loads(warm.read_text())
        drift = np.abs(np.asarray(warm_doc["coords"]) - np.asarray(doc["coords"]))
        assert drift.max() < 1.0  # warm start stays near the converged layout


class TestBenchCli:
    def test_csv_schema_and_cells(self, tmp_path, traj_file):
        out = tmp_path / "bench.csv"
        assert main(["bench", "--input", str(traj_file),
                     "--cutoffs", "4.5,7.5", "--measures", "degree,plm",
                     "--frames", "0,1", "--reps", "3", "--out", str(out)]) == 0
        with open(out) as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == CSV_HEADER.split(",")
        assert len(rows) - 1 == 2 * 2 * 3  # cutoffs × measures × event kinds
        by_kind = {}
        for row in rows[1:]:
            rec = dict(zip(rows[0], row))
            assert int(rec["repetitions"]) == 3
            assert float(rec["total_ms"]) >= 0
            by_kind.setdefault(rec["event_kind"], []).append(rec)
        assert set(by_kind) == {"MeasureSwitch", "CutoffSwitch", "FrameSwitch"}

    def test_unknown_measure_rejected(self, tmp_path, traj_file):
        assert main(["bench", "--input", str(traj_file), "--cutoffs", "4.5",
                     "--measures", "nope", "--frames", "0,1", "--reps", "3",
                     "--out", str(tmp_path / "x.csv")]) == 2


class TestBenchApi:
    def test_validation(self):
        traj = walk_trajectory(20, n_frames=1, seed=0)
        cfg = RinConfig(DistanceCriterion.MINIMUM_ATOM_DISTANCE, 4.5)
        with pytest.raises(ValueError, match="2 frames"):
            run_benchmark(traj, cfg, [4.5], ["degree"], [0], 3)
        traj2 = walk_trajectory(20, n_frames=3, seed=0)
        with pytest.raises(ValueError, match="repetitions"):
            run_benchmark(traj2, cfg, [4.5], ["degree"], [0, 1], 2)

    def test_failed_cell_marked_not_fatal(self):
        traj = walk_trajectory(20, n_frames=3, seed=0)
        cfg = RinConfig(DistanceCriterion.MINIMUM_ATOM_DISTANCE, 4.5)
        records = run_benchmark(traj, cfg, [4.5], ["degree", "bogus"], [0, 1], 3)
        ok = [r for r in records if r.measure == "degree"]
        failed = [r for r in records if r.measure == "bogus"]
        assert len(ok) == 3 and len(failed) == 3
        assert all(not math.isnan(r.total_ms) for r in ok)
        assert all(math.isnan(r.total_ms) for r in failed)

    def test_medians_over_reps(self):
        traj = walk_trajectory(15, n_frames=2, seed=1)
        cfg = RinConfig(DistanceCriterion.MINIMUM_ATOM_DISTANCE, 4.5)
        records = run_benchmark(traj, cfg, [4.5], ["degree"], [0, 1], 3,
                                protein_id="toy")
        assert len(records) == 3
        assert {r.event_kind.value for r in records} == {
            "MeasureSwitch", "CutoffSwitch", "FrameSwitch"
        }
        assert all(r.protein_id == "toy" for r in records)
        assert all(r.n_nodes == 15 for r in records)


class TestSynth:
    def test_helix_output(self, tmp_path):
        out = tmp_path / "helix.json"
        assert main(["synth", "--kind", "helix", "--frames", "2", "--out", str(out)]) == 0
        doc = json.loads(out.read_text())
        assert len(doc["residues"]) == 66
        assert len(doc["frames"]) == 2
