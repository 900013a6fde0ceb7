import json
import shutil

import pytest

from solitonlab.cli import main

from conftest import config_path, decomposition_path


def shipped(name, tmp_path):
    dst = tmp_path / name
    with config_path(name).open("rb") as src, open(dst, "wb") as out:
        shutil.copyfileobj(src, out)
    return str(dst)


def write_json(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


BASE = {
    "system": "two_summands",
    "ansatz": {"d1": 1, "d2": 2, "A1": 0.0, "A2": 6.0, "A3": 1.0},
    "epsilon": 0.0,
    "C": -1.0,
    "initial": 1.0,
    "integrator": {"t_max": 5.0},
}


class TestSolve:
    def test_complete_run_exits_zero_and_writes_artifacts(self, tmp_path, capsys):
        out = tmp_path / "run"
        code = main(["solve", "--config", write_json(tmp_path, "c.json", BASE), "--out", str(out)])
        assert code == 0
        for name in ("trajectory.csv", "report.json", "manifest.json"):
            assert (out / name).exists()
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["verdict"] == "numerically_complete"
        assert manifest["artifacts"][-1] == "manifest.json"
        header = (out / "trajectory.csv").read_text().splitlines()[0]
        for col in ("t", "f1", "df1", "u", "du", "udd", "conservation_residual", "omega"):
            assert col in header.split(",")

    def test_matched_expectation_exits_zero(self, tmp_path):
        cfg = shipped("ts_exit_einstein.json", tmp_path)
        assert main(["solve", "--config", cfg, "--out", str(tmp_path / "o")]) == 0

    def test_unmet_expectation_exits_two(self, tmp_path):
        doc = dict(BASE, expect="invariant_set_exit")
        code = main(["solve", "--config", write_json(tmp_path, "c.json", doc), "--out", str(tmp_path / "o")])
        assert code == 2

    def test_nonpositive_size_is_config_error(self, tmp_path, capsys):
        doc = dict(BASE, initial=-1.0)
        code = main(["solve", "--config", write_json(tmp_path, "c.json", doc), "--out", str(tmp_path / "o")])
        assert code == 64
        assert "initial" in capsys.readouterr().err

    def test_unknown_system_is_config_error(self, tmp_path, capsys):
        doc = dict(BASE, system="warped")
        code = main(["solve", "--config", write_json(tmp_path, "c.json", doc), "--out", str(tmp_path / "o")])
        assert code == 64
        assert "system" in capsys.readouterr().err

    def test_rescaled_chart_rejected_off_circle_bundle(self, tmp_path, capsys):
        doc = dict(BASE, chart="both")
        code = main(["solve", "--config", write_json(tmp_path, "c.json", doc), "--out", str(tmp_path / "o")])
        assert code == 64
        assert "chart" in capsys.readouterr().err

    def test_plot_flag_writes_svg(self, tmp_path):
        out = tmp_path / "run"
        main(["solve", "--config", write_json(tmp_path, "c.json", BASE), "--out", str(out), "--plot"])
        svg = (out / "trajectory.svg").read_text()
        assert svg.startswith("<svg") and "polyline" in svg


class TestDeterminism:
    def test_rerun_is_bitwise_identical(self, tmp_path):
        cfg = write_json(tmp_path, "c.json", BASE)
        main(["solve", "--config", cfg, "--out", str(tmp_path / "a")])
        main(["solve", "--config", cfg, "--out", str(tmp_path / "b")])
        assert (tmp_path / "a/trajectory.csv").read_bytes() == (tmp_path / "b/trajectory.csv").read_bytes()


class TestSweep:
    def test_single_cell_matches_solve(self, tmp_path):
        cfg = write_json(tmp_path, "c.json", BASE)
        main(["solve", "--config", cfg, "--out", str(tmp_path / "solo")])
        code = main(["sweep", "--config", cfg, "--grid", "C=-1:0:1", "--out", str(tmp_path / "sw")])
        assert code == 0
        assert (tmp_path / "solo/trajectory.csv").read_bytes() == (
            tmp_path / "sw/cell_0000/trajectory.csv"
        ).read_bytes()

    def test_grid_rows_cover_all_cells(self, tmp_path):
        cfg = write_json(tmp_path, "c.json", BASE)
        code = main(
            [
                "sweep", "--config", cfg,
                "--grid", "C=-0.5:-0.5:2",
                "--grid", "fbar=1.0:0.5:2",
                "--out", str(tmp_path / "sw"),
            ]
        )
        assert code == 0
        lines = (tmp_path / "sw/sweep_summary.csv").read_text().splitlines()
        assert lines[0].startswith("C,fbar,cell,verdict")
        assert len(lines) == 1 + 4
        for i in range(4):
            assert (tmp_path / f"sw/cell_{i:04d}/manifest.json").exists()

    def test_bad_grid_spec(self, tmp_path, capsys):
        cfg = write_json(tmp_path, "c.json", BASE)
        assert main(["sweep", "--config", cfg, "--grid", "C=oops", "--out", str(tmp_path / "sw")]) == 64
        assert main(["sweep", "--config", cfg, "--grid", "zz=0:1:2", "--out", str(tmp_path / "sw")]) == 64


class TestProbe:
    def test_probe_writes_report_and_samples(self, tmp_path):
        cfg = shipped("ts_probe_d1.json", tmp_path)
        out = tmp_path / "probe"
        code = main(["probe-c0", "--config", cfg, "--c", "2.0", "--tau", "0.25", "--out", str(out)])
        assert code == 0
        report = json.loads((out / "probe_report.json").read_text())
        assert report["empirical_C0"] < 0
        lines = (out / "probe_samples.csv").read_text().splitlines()
        assert lines[0] == "C,slope_at_tau"
        assert len(lines) - 1 == len(report["samples"])

    def test_unreachable_target_exits_three(self, tmp_path, capsys):
        doc = dict(BASE, C=-1.0)
        cfg = write_json(tmp_path, "c.json", doc)
        code = main(["probe-c0", "--config", cfg, "--c", "1e9", "--tau", "0.05", "--out", str(tmp_path / "o")])
        assert code == 3
        assert "no admissible" in capsys.readouterr().err


class TestCurvature:
    def test_flat_torus(self, capsys):
        code = main(
            ["curvature", "--decomposition", str(decomposition_path("flat_torus_2.json")), "--x", "2,3"]
        )
        assert code == 0
        out = capsys.readouterr().out
        assert "scalar_curvature: 0" in out

    def test_round_sphere_value(self, capsys):
        code = main(
            ["curvature", "--decomposition", str(decomposition_path("su2_unit.json")), "--x", "1"]
        )
        assert code == 0
        assert "scalar_curvature: 6" in capsys.readouterr().out

    def test_sign_violation_exits_65(self, tmp_path, capsys):
        doc = {
            "summands": [{"dim": 2, "b": 1.0}],
            "triples": [{"i": 0, "j": 0, "k": 0, "value": -2.0}],
        }
        path = write_json(tmp_path, "bad.json", doc)
        assert main(["curvature", "--decomposition", path, "--x", "1"]) == 65
        assert "sign violation" in capsys.readouterr().err

    def test_duplicate_triple_exits_64(self, tmp_path):
        doc = {
            "summands": [{"dim": 2, "b": 1.0}],
            "triples": [
                {"i": 0, "j": 0, "k": 0, "value": 1.0},
                {"i": 0, "j": 0, "k": 0, "value": 2.0},
            ],
        }
        path = write_json(tmp_path, "dup.json", doc)
        assert main(["curvature", "--decomposition", path, "--x", "1"]) == 64

    def test_dimension_mismatch_is_config_error(self):
        code = main(
            ["curvature", "--decomposition", str(decomposition_path("su2_unit.json")), "--x", "1,2"]
        )
        assert code == 64
