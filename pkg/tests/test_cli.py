"""Command-line interface: exit codes, artifacts, and analyze/simulate
round-trip determinism."""

import json
import math

import numpy as np
import pytest

from pkgwave.cli import (
    EXIT_BUDGET,
    EXIT_INVALID,
    EXIT_OK,
    main,
)
from pkgwave.geometry import make_scenario
from pkgwave.scenario_io import save_scenario
from pkgwave.touchstone import write_touchstone

FREQS = np.linspace(50e9, 70e9, 5)


def tiny_scenario(antennas="1"):
    # no interconnect layer and a thicker bump sheet: keeps the smallest
    # cell (and so the step count) reasonable for a unit-test-sized run
    return make_scenario(
        "single_chip_walled",
        chip_size=2e-3,
        wall_offset=1e-3,
        antennas_per_chip=antennas,
        interconnect_thickness=None,
        bump_thickness=150e-6,
    )


def write_two_port(path):
    """|S21| = 0.1 and |S11| = |S22| = 0.2 flat across the band, so every
    report number is computable by hand."""
    s = np.zeros((len(FREQS), 2, 2), dtype=complex)
    s[:, 0, 0] = 0.2
    s[:, 1, 1] = 0.2
    s[:, 0, 1] = 0.1
    s[:, 1, 0] = 0.1
    write_touchstone(path, FREQS, s)


def write_positions(path):
    path.write_text("port,x_m,y_m,z_m\n1,0.0,0.0,0.0\n2,0.003,0.004,0.0\n")


class TestValidate:
    def test_ok(self, tmp_path, capsys):
        scn = tmp_path / "case.scn"
        save_scenario(tiny_scenario(), scn)
        assert main(["validate", "--scenario", str(scn)]) == EXIT_OK
        assert "ok:" in capsys.readouterr().out

    def test_parse_error(self, tmp_path):
        scn = tmp_path / "bad.scn"
        scn.write_text("this is not a scenario\n")
        assert main(["validate", "--scenario", str(scn)]) == EXIT_INVALID

    def test_missing_file(self, tmp_path):
        assert main(["validate", "--scenario", str(tmp_path / "none.scn")]) == EXIT_INVALID


class TestAnalyze:
    def test_hand_computed_report(self, tmp_path):
        ts = tmp_path / "case.s2p"
        pos = tmp_path / "positions.csv"
        out = tmp_path / "out"
        write_two_port(ts)
        write_positions(pos)
        rc = main([
            "analyze", "--touchstone", str(ts), "--positions", str(pos),
            "--out", str(out), "--band", "50", "70",
        ])
        assert rc == EXIT_OK
        report = json.loads((out / "report.json").read_text())
        avg = report["band_avg_db"]
        assert avg[0][0] is None  # reflection diagonal carries no channel
        assert avg[0][1] == pytest.approx(-20.0, abs=1e-9)
        assert report["s_min_db"] == pytest.approx(-20.0, abs=1e-9)
        assert report["s_min_pair"] == [1, 2]
        # mismatch-corrected loss: |S21|^2 / (1 - |S11|^2)(1 - |S22|^2)
        expected_loss = -10 * math.log10(0.01 / (0.96 * 0.96))
        pair = next(r for r in report["pairs"] if r["i"] == 1 and r["j"] == 2)
        assert pair["loss_db"] == pytest.approx(expected_loss, abs=1e-9)
        assert pair["distance_m"] == pytest.approx(5e-3)
        assert report["path_loss_fit"] is None  # one distance, no regression

    def test_deterministic_output(self, tmp_path):
        ts = tmp_path / "case.s2p"
        write_two_port(ts)
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            assert main(["analyze", "--touchstone", str(ts), "--out", str(out)]) == EXIT_OK
        assert (a / "report.json").read_bytes() == (b / "report.json").read_bytes()

    def test_fit_requires_positions(self, tmp_path):
        ts = tmp_path / "case.s2p"
        write_two_port(ts)
        out = tmp_path / "out"
        rc = main(["analyze", "--touchstone", str(ts), "--out", str(out), "--fit"])
        assert rc == EXIT_INVALID
        err = json.loads((out / "error.json").read_text())
        assert err["exit_code"] == EXIT_INVALID
        assert "positions" in err["message"]

    def test_positions_port_count_mismatch(self, tmp_path):
        ts = tmp_path / "case.s2p"
        write_two_port(ts)
        pos = tmp_path / "positions.csv"
        pos.write_text("port,x_m,y_m,z_m\n1,0.0,0.0,0.0\n")
        rc = main([
            "analyze", "--touchstone", str(ts), "--positions", str(pos),
            "--out", str(tmp_path / "out"),
        ])
        assert rc == EXIT_INVALID

    def test_bad_positions_header(self, tmp_path):
        ts = tmp_path / "case.s2p"
        write_two_port(ts)
        pos = tmp_path / "positions.csv"
        pos.write_text("x,y,z\n0,0,0\n")
        rc = main([
            "analyze", "--touchstone", str(ts), "--positions", str(pos),
            "--out", str(tmp_path / "out"),
        ])
        assert rc == EXIT_INVALID


class TestBudgets:
    def test_simulate_refuses_before_launch(self, tmp_path):
        scn = tmp_path / "case.scn"
        save_scenario(tiny_scenario(), scn)
        out = tmp_path / "out"
        rc = main([
            "simulate", "--scenario", str(scn), "--out", str(out), "--max-cells", "1000",
        ])
        assert rc == EXIT_BUDGET
        est = json.loads((out / "cost_estimate.json").read_text())
        assert est["cell_count"] > 1000
        assert json.loads((out / "error.json").read_text())["exit_code"] == EXIT_BUDGET
        assert not list(out.glob("result.s*p"))  # refused before any run
        assert not (out / "run_log.json").exists()

    def test_env_budget_honored(self, tmp_path, monkeypatch):
        monkeypatch.setenv("PKGWAVE_MAX_CELLS", "1000")
        scn = tmp_path / "case.scn"
        save_scenario(tiny_scenario(), scn)
        rc = main(["simulate", "--scenario", str(scn), "--out", str(tmp_path / "out")])
        assert rc == EXIT_BUDGET


class TestSweepCommand:
    def test_bad_plan_is_invalid_input(self, tmp_path):
        plan = tmp_path / "plan.swp"
        plan.write_text("axis.silicon_thickness = 0.1 mm\n")  # missing preset
        rc = main(["sweep", "--plan", str(plan), "--out", str(tmp_path / "out")])
        assert rc == EXIT_INVALID


class TestReproduce:
    def test_full_scale_emits_estimate_only(self, tmp_path):
        out = tmp_path / "fig3a"
        rc = main(["reproduce", "fig3a", "--scale", "full", "--out", str(out)])
        assert rc == EXIT_OK
        est = json.loads((out / "cost_estimate.json").read_text())
        assert est["resolution"] == 15
        assert est["scenarios"][0]["estimate"]["cell_count"] > 0
        assert not (out / "manifest.json").exists()  # nothing was run

    def test_unknown_figure_rejected(self, tmp_path):
        with pytest.raises(SystemExit):
            main(["reproduce", "fig99", "--out", str(tmp_path)])


class TestSimulateRoundTrip:
    def test_end_to_end_and_reanalysis(self, tmp_path):
        scn = tmp_path / "case.scn"
        save_scenario(tiny_scenario(antennas="2x2"), scn)
        out = tmp_path / "run"
        rc = main(["simulate", "--scenario", str(scn), "--out", str(out)])
        assert rc == EXIT_OK
        for name in (
            "result.s4p", "report.json", "positions.csv", "scenario.scn",
            "provenance.json", "run_log.json", "cost_estimate.json",
        ):
            assert (out / name).exists(), name
        # re-analyzing the written Touchstone reproduces the report exactly
        out2 = tmp_path / "re"
        rc = main([
            "analyze", "--touchstone", str(out / "result.s4p"),
            "--positions", str(out / "positions.csv"),
            "--out", str(out2), "--band", "50", "70",
        ])
        assert rc == EXIT_OK
        assert (out / "report.json").read_bytes() == (out2 / "report.json").read_bytes()
        report = json.loads((out / "report.json").read_text())
        assert report["n_ports"] == 4
