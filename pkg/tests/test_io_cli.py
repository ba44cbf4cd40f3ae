import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from so3align.align import align_pasi, AlignmentConfig
from so3align.cli import main
from so3align.errors import EmptyFile, NonUnitQuaternion, ParseError
from so3align.evaluation import error_report
from so3align.io import (
    alignment_from_dict,
    alignment_to_dict,
    emit_report,
    error_report_to_dict,
    export_pose_csv,
    ingest_pose_csv,
    load_alignment,
    parse_columns,
    write_histogram_csv,
)
from so3align.permutations import from_mapping
from so3align.rotation import RotationSet, axis_rotation, geodesic_angle
from so3align.synthesis import generate_scenario, plant_global, random_rotations, scenario

ETH = from_mapping("Ax->-By, Ay->+Bx, Az->+Bz")


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


def run_cli(argv, capsys):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


class TestIngest:
    def test_identity_row(self, tmp_path):
        rs = ingest_pose_csv(write(tmp_path / "p.csv", "0.0,0,0,0,0,0,0,1\n"))
        assert len(rs) == 1 and rs.timestamps[0] == 0.0
        np.testing.assert_allclose(rs.matrices[0], np.eye(3), atol=1e-15)

    def test_quarter_turn(self, tmp_path):
        rs = ingest_pose_csv(write(tmp_path / "p.csv", "1.0,0,0,0,0,0,0.7071,0.7071\n"))
        np.testing.assert_allclose(rs.matrices[0], axis_rotation("z", np.pi / 2), atol=1e-3)

    def test_nan_names_row(self, tmp_path):
        p = write(tmp_path / "p.csv", "t,x,y,z,qx,qy,qz,qw\n0,0,0,0,0,0,0,1\n1,0,0,0,nan,0,0,1\n")
        with pytest.raises(ParseError) as exc:
            ingest_pose_csv(p)
        assert exc.value.row == 3 and ":3:" in str(exc.value)

    def test_text_value(self, tmp_path):
        with pytest.raises(ParseError):
            ingest_pose_csv(write(tmp_path / "p.csv", "0,0,0,0,0,0,0,1\n1,0,0,0,0,0,abc,1\n"))

    def test_non_unit(self, tmp_path):
        with pytest.raises(NonUnitQuaternion):
            ingest_pose_csv(write(tmp_path / "p.csv", "0,0,0,0,0,0,0,2\n"))

    def test_empty(self, tmp_path):
        with pytest.raises(EmptyFile):
            ingest_pose_csv(write(tmp_path / "p.csv", ""))
        with pytest.raises(EmptyFile):
            ingest_pose_csv(write(tmp_path / "h.csv", "t,x,y,z,qx,qy,qz,qw\n"))

    def test_euroc_header(self, tmp_path):
        head = "#timestamp [ns], p_RS_R_x [m], p_RS_R_y [m], p_RS_R_z [m], q_RS_w [], q_RS_x [], q_RS_y [], q_RS_z [], v_RS_R_x [m s^-1]\n"
        rs = ingest_pose_csv(write(tmp_path / "e.csv", head + "1403636579758555392,4.6,-1.8,0.7,0,0,0,1,0.1\n"), time_scale=1e-9)
        np.testing.assert_allclose(rs.matrices[0], axis_rotation("z", np.pi), atol=1e-12)
        assert rs.timestamps[0] == pytest.approx(1403636579.758555392)

    def test_explicit_columns_and_jpl(self, tmp_path):
        p = write(tmp_path / "p.csv", "0.5,0,0,0.7071,0.7071,9,9,9,9\n")
        ham = ingest_pose_csv(p, "t,_,_,qz,qw,x,y,z,_".replace("_,_,qz", "qx,qy,qz"))
        jpl = ingest_pose_csv(p, "t,qx,qy,qz,qw,x,y,z,_", quat_convention="jpl")
        np.testing.assert_allclose(ham.matrices[0], axis_rotation("z", np.pi / 2), atol=1e-3)
        np.testing.assert_allclose(jpl.matrices[0], axis_rotation("z", -np.pi / 2), atol=1e-3)

    def test_bad_columns(self):
        with pytest.raises(ParseError):
            parse_columns("t,x,y,z,qx,qy,qz")

    def test_round_trip(self, tmp_path):
        rs = RotationSet(random_rotations(200, seed=0), np.linspace(0, 2, 200))
        export_pose_csv(rs, tmp_path / "r.csv")
        back = ingest_pose_csv(tmp_path / "r.csv")
        assert np.max(geodesic_angle(back.matrices, rs.matrices)) < 1e-9
        np.testing.assert_array_equal(back.timestamps, rs.timestamps)


class TestReports:
    def test_alignment_json_round_trip(self, tmp_path):
        a = generate_scenario(scenario(1, 300, seed=0))
        b = plant_global(a, random_rotations(1, seed=0)[0], ETH)
        ga = align_pasi(a, b, AlignmentConfig(pasi=True))
        d = alignment_to_dict(ga)
        assert all(isinstance(v, int) for row in d["l_star"] for v in row)
        assert np.asarray(d["r_bar"]).shape == (3, 3) and len(d["hypothesis_scores"]) == 24
        emit_report(ga, tmp_path / "ga.json")
        back = load_alignment(tmp_path / "ga.json")
        assert back.l_star == ga.l_star and np.array_equal(back.r_bar, ga.r_bar)
        assert alignment_from_dict(json.loads(json.dumps(d))).l_star == ETH

    def test_error_report_csv_rows(self, tmp_path):
        a = random_rotations(3, seed=1)
        emit_report(error_report(a, a), tmp_path / "e.csv", "csv")
        rows = list(csv.reader((tmp_path / "e.csv").open()))
        assert rows[0] == ["index_a", "index_b", "error_deg"] and len(rows) == 4

    def test_empty_stats_are_null(self, tmp_path):
        from so3align.evaluation import ErrorReport

        rep = ErrorReport(np.empty(0), np.empty((0, 2)), None, None, None, {1.0: None})
        emit_report(rep, tmp_path / "e.json")
        d = json.loads((tmp_path / "e.json").read_text())
        assert d["mae_deg"] is None and d["rmse_deg"] is None and d["success_rates"]["1"] is None
        assert error_report_to_dict(rep)["n_pairs"] == 0

    def test_histogram_csv(self, tmp_path):
        write_histogram_csv(np.array([1.0, 0, 2, 0]), tmp_path / "h.csv")
        rows = list(csv.reader((tmp_path / "h.csv").open()))
        assert rows[0] == ["bin_lo_deg", "bin_hi_deg", "count"] and rows[3] == ["180", "270", "2"]


class TestCli:
    def test_enumerate(self, capsys):
        code, out, _ = run_cli(["enumerate-l", "--proper"], capsys)
        assert code == 0 and out.count("det=+1") == 24
        code, out, _ = run_cli(["enumerate-l", "--all", "--json"], capsys)
        assert code == 0 and len(json.loads(out)) == 48

    def test_simulate(self, capsys):
        code, out, _ = run_cli(["simulate", "--scenario", 1, "--n", 2000, "--matcher", "spmc", "--seed", 7], capsys)
        d = json.loads(out)
        assert code == 0 and d["mae_deg"] <= 0.2

    def test_simulate_reproducible(self, capsys):
        argv = ["simulate", "--scenario", 3, "--n", 300, "--trials", 2, "--level", "B4", "--seed", 11, "--pasi"]
        first = json.loads(run_cli(argv, capsys)[1])
        second = json.loads(run_cli(argv, capsys)[1])
        for d in (first, second):
            d.pop("runtime_s")
        assert first == second

    def test_simulate_planted(self, capsys):
        code, out, _ = run_cli(["simulate", "--n", 500, "--trials", 2, "--pasi", "--plant-l", "Ax->-By, Ay->+Bx, Az->+Bz"], capsys)
        assert json.loads(out)["l_star_recovery_rate"] == 1.0

    def export_pair(self, tmp_path, capsys):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert run_cli(["export", a, "--n", 400, "--seed", 3], capsys)[0] == 0
        assert run_cli(["export", b, "--n", 400, "--seed", 3, "--role", "source", "--plant-l", "Ax->-By,Ay->Bx,Az->Bz"], capsys)[0] == 0
        return a, b

    def test_align(self, tmp_path, capsys):
        a, b = self.export_pair(tmp_path, capsys)
        code, out, _ = run_cli(
            ["align", a, b, "--pasi", "--eval-max-gap", 1e-3, "--errors-csv", tmp_path / "e.csv", "--hist-dir", tmp_path / "h"], capsys
        )
        d = json.loads(out)
        assert code == 0 and d["l_star"] == [[0, -1, 0], [1, 0, 0], [0, 0, 1]]
        assert len(d["hypothesis_scores"]) == 24 and np.asarray(d["r_bar"]).shape == (3, 3)
        assert d["evaluation"]["mae_deg"] < 1e-6
        assert (tmp_path / "e.csv").exists() and len(list((tmp_path / "h").glob("*.csv"))) == 6

    def test_align_ignores_translation(self, tmp_path, capsys):
        a, b = self.export_pair(tmp_path, capsys)
        base = json.loads(run_cli(["align", a, b], capsys)[1])
        rows = list(csv.reader(b.open()))
        rng = np.random.default_rng(0)
        for r in rows[1:]:
            r[1:4] = [repr(float(v)) for v in rng.normal(0, 100, 3)]
        with b.open("w", newline="") as fh:
            csv.writer(fh).writerows(rows)
        code, out, err = run_cli(["align", a, b], capsys)
        assert code == 0, err
        moved = json.loads(out)
        base.pop("runtime_s"), moved.pop("runtime_s")
        assert base == moved

    def test_validate(self, tmp_path, capsys):
        a, _ = self.export_pair(tmp_path, capsys)
        code, out, _ = run_cli(["validate", a], capsys)
        assert code == 0 and json.loads(out)["rows"] == 400

    def test_failure_is_json_exit_one(self, tmp_path, capsys):
        bad = write(tmp_path / "bad.csv", "0,0,0,0,0,0,0,1\n1,0,0,0,0,0,nan,1\n")
        code, _, err = run_cli(["validate", bad], capsys)
        assert code == 1 and json.loads(err)["error"] == "ParseError"

    def test_usage_error_exit_two(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["simulate", "--scenario", "9"])
        assert exc.value.code == 2

    def test_config_file_and_override(self, tmp_path, capsys):
        cfg = write(tmp_path / "c.json", json.dumps({"n": 150, "scenario": 2, "level": "B3"}))
        d = json.loads(run_cli(["--config", cfg, "simulate"], capsys)[1])
        assert (d["n"], d["scenario"], d["level"]) == (150, 2, "B3")
        d = json.loads(run_cli(["--config", cfg, "simulate", "--n", 120], capsys)[1])
        assert d["n"] == 120

    def test_bench_small(self, tmp_path, capsys):
        code, out, _ = run_cli(["bench", "--sizes", "200,400", "--repeats", 1, "--window-min", 100, "--csv", tmp_path / "b.csv"], capsys)
        d = json.loads(out)
        assert code == 0 and d["sizes"] == [200, 400] and d["loglog_slope"] is not None

    def test_module_entry_point(self):
        out = subprocess.run([sys.executable, "-m", "so3align", "enumerate-l", "--json"], capture_output=True, text=True, check=True)
        assert len(json.loads(out.stdout)) == 24
