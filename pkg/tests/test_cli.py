"""Tests for the command-line interface."""

import json

import numpy as np
import pytest

from bhmflow.cli import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, cli_main


def write_config(tmp_path, doc, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def simulate_config(out_dir, **overrides):
    doc = {
        "experiment": "simulate",
        "model": {"preset": "thin_film", "eps": 0.1},
        "grid": {"n": [32, 32], "length_pi": [6, 6]},
        "ic": {"kind": "cosine", "mean": 0.6, "amp": 0.1},
        "scheme": {"kind": "imex2"},
        "split": {"m2": {"static": 0.3}},
        "h": 0.1,
        "t_end": 0.5,
        "out_dir": out_dir,
    }
    doc.update(overrides)
    return doc


class TestValidate:
    def test_prints_plan(self, tmp_path, capsys):
        cfg = write_config(tmp_path, simulate_config(str(tmp_path / "out")))
        assert cli_main(["validate", "--config", cfg]) == EXIT_OK
        out = capsys.readouterr().out
        assert "experiment: simulate" in out
        assert "1 cell(s)" in out and "5 total steps" in out

    def test_quiet_suppresses_output(self, tmp_path, capsys):
        cfg = write_config(tmp_path, simulate_config(str(tmp_path / "out")))
        assert cli_main(["validate", "--config", cfg, "--quiet"]) == EXIT_OK
        assert capsys.readouterr().out == ""


class TestExitCodes:
    def test_missing_config_file(self, tmp_path, capsys):
        code = cli_main(["simulate", "--config", str(tmp_path / "nope.json")])
        assert code == EXIT_CONFIG
        assert "config error" in capsys.readouterr().err

    def test_invalid_config_contents(self, tmp_path, capsys):
        doc = simulate_config(str(tmp_path / "out"))
        doc["h"] = -1
        cfg = write_config(tmp_path, doc)
        assert cli_main(["simulate", "--config", cfg]) == EXIT_CONFIG

    def test_unknown_subcommand(self, tmp_path):
        assert cli_main(["frobnicate", "--config", "x.json"]) == EXIT_CONFIG

    def test_no_subcommand(self, capsys):
        assert cli_main([]) == EXIT_CONFIG

    def test_numerical_failure(self, tmp_path):
        # near-rupture film with an under-stabilized huge step fails fast
        doc = simulate_config(str(tmp_path / "out"),
                              ic={"kind": "cosine", "mean": 0.15, "amp": 0.14},
                              split={"m2": {"static": 1e-6}},
                              scheme={"kind": "be", "j": 2},
                              h=1.0, t_end=10.0)
        cfg = write_config(tmp_path, doc)
        code = cli_main(["simulate", "--config", cfg, "--quiet"])
        assert code == EXIT_NUMERICAL
        manifest = json.loads((tmp_path / "out" / "manifest.json").read_text())
        assert manifest["failure"] is not None


class TestSimulate:
    def test_writes_record_manifest_snapshots(self, tmp_path):
        out = tmp_path / "out"
        doc = simulate_config(str(out), snapshot_times=[0.0, 0.3])
        cfg = write_config(tmp_path, doc)
        assert cli_main(["simulate", "--config", cfg, "--quiet"]) == EXIT_OK
        record = (out / "record.csv").read_text().strip().split("\n")
        assert record[0] == "t,energy,mass,mobility_max,umin,umax"
        assert len(record) == 7  # header + t0 + 5 steps
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["config"]["experiment"] == "simulate"
        assert manifest["energy_stable"] in (True, False)
        assert (out / "snapshot_t0.bhm").exists()
        assert (out / "snapshot_t0.3.bhm").exists()

    def test_out_override(self, tmp_path):
        doc = simulate_config(str(tmp_path / "ignored"))
        cfg = write_config(tmp_path, doc)
        out = tmp_path / "elsewhere"
        assert cli_main(["simulate", "--config", cfg, "--quiet",
                         "--out", str(out)]) == EXIT_OK
        assert (out / "record.csv").exists()
        assert not (tmp_path / "ignored").exists()


class TestConverge:
    def test_csv_and_slope_line(self, tmp_path, capsys):
        out = tmp_path / "out"
        doc = {
            "experiment": "converge",
            "model": {"preset": "forced_thin_film", "eps": 0.1},
            "grid": {"n": [32, 32], "length_pi": [2, 2]},
            "ic": {"kind": "manufactured"},
            "scheme": {"kind": "imex2"},
            "split": {"m2": {"static": 0.125}},
            "h_list": [0.125, 0.0625, 0.03125],
            "t_end": 0.5,
            "reference": {"kind": "manufactured"},
            "out_dir": str(out),
        }
        cfg = write_config(tmp_path, doc)
        assert cli_main(["converge", "--config", cfg, "--quiet"]) == EXIT_OK
        printed = capsys.readouterr().out
        assert printed.startswith("slope ")
        slope = float(printed.split()[1])
        assert slope == pytest.approx(2.0, abs=0.4)
        rows = (out / "convergence.csv").read_text().strip().split("\n")
        assert rows[0] == "h,error"
        assert len(rows) == 4
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["slope"] == pytest.approx(slope, abs=5e-5)


class TestM2Sweep:
    def test_csv_and_threshold_line(self, tmp_path, capsys):
        out = tmp_path / "out"
        doc = {
            "experiment": "m2sweep",
            "model": {"preset": "forced_thin_film", "eps": 0.1},
            "grid": {"n": [32, 32], "length_pi": [2, 2]},
            "ic": {"kind": "manufactured"},
            "scheme": {"kind": "imex2"},
            "split": {"m2": {"static": 0.125}},
            "h": 0.125,
            "t_end": 0.5,
            "m2_values": [0.5, 0.25, 0.125],
            "reference": {"kind": "manufactured"},
            "out_dir": str(out),
        }
        cfg = write_config(tmp_path, doc)
        assert cli_main(["m2sweep", "--config", cfg, "--quiet"]) == EXIT_OK
        assert capsys.readouterr().out.startswith("m2_star ")
        rows = (out / "m2sweep.csv").read_text().strip().split("\n")
        assert rows[0] == "m2,error,stable"
        assert len(rows) == 4
        assert all(r.endswith(",1") for r in rows[1:])  # all stable here


class TestStabmap:
    def test_matrix_and_boundary(self, tmp_path):
        out = tmp_path / "out"
        doc = {
            "experiment": "stabmap",
            "model": {"preset": "thin_film", "eps": 0.1},
            "grid": {"n": [32, 32], "length_pi": [6, 6]},
            "ic": {"kind": "cosine", "mean": 0.6, "amp": 0.1},
            "scheme": {"kind": "imex2"},
            "split": {"m2": {"static": 0.3}},
            "h_list": [0.05, 0.5],
            "param": "alpha",
            "param_values": [0.3, 1.0],
            "n_steps": 20,
            "out_dir": str(out),
        }
        cfg = write_config(tmp_path, doc)
        assert cli_main(["stabmap", "--config", cfg, "--quiet"]) == EXIT_OK
        matrix = (out / "stability_map.csv").read_text().strip().split("\n")
        assert matrix[0].startswith("alpha,h=")
        assert len(matrix) == 3
        boundary = (out / "boundary.csv").read_text().strip().split("\n")
        assert boundary[0] == "h,min_stable_alpha"
        assert len(boundary) == 3


class TestSeedOverride:
    def test_seed_flag_changes_random_ic(self, tmp_path):
        def run(seed, name):
            out = tmp_path / name
            doc = simulate_config(str(out),
                                  ic={"kind": "random", "mean": 0.6,
                                      "eta": 0.05, "seed": 1},
                                  t_end=0.2)
            cfg = write_config(tmp_path, doc, name=f"{name}.json")
            args = ["simulate", "--config", cfg, "--quiet"]
            if seed is not None:
                args += ["--seed", str(seed)]
            assert cli_main(args) == EXIT_OK
            return (out / "record.csv").read_text()

        base = run(None, "a")
        same = run(1, "b")
        other = run(7, "c")
        assert base == same
        assert base != other
