"""Command-line front end.

Subcommands: simulate, analyze, tune, sweep, validate, reproduce.
Exit codes: 0 success, 2 invalid input, 3 budget refusal, 4 solver
failure, 5 results carry an unconverged flag.

Every result file is byte-reproducible for identical inputs and artifact
version; wall-clock timing lives only in log files (run_log.json,
manifest.json), never in result files.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .channel import scenario_report, write_report_files
from .desk import DESK_RESOLUTION, desk_scenario
from .geometry import Band, make_scenario, validate_scenario
from .mesh import generate_mesh
from .pipeline import check_budget, simulate_scenario
from .ports import SParameterSet, return_loss_curve, tune_monopole
from .scenario_io import ScenarioFileError, load_scenario, save_scenario
from .solver import PmlConfig, RunPolicy, Simulation, SolverError
from .sweep import (
    SweepError,
    SweepPlan,
    frequency_scaling,
    load_sweep_plan,
    report_optimum,
    run_sweep,
)
from .touchstone import TouchstoneError, read_touchstone, write_touchstone

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_BUDGET = 3
EXIT_SOLVER = 4
EXIT_UNCONVERGED = 5

log = logging.getLogger("pkgwave")


class BudgetExceeded(RuntimeError):
    pass


# ----------------------------------------------------------------------
# helpers

def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _budget(args) -> dict:
    def pick(flag, env, default, cast):
        if flag is not None:
            return cast(flag)
        if env in os.environ:
            return cast(os.environ[env])
        return default

    return {
        "max_cells": pick(getattr(args, "max_cells", None), "PKGWAVE_MAX_CELLS", 40_000_000, int),
        "max_memory_bytes": pick(
            getattr(args, "max_memory", None), "PKGWAVE_MAX_MEMORY_BYTES", 16_000_000_000, int
        ),
        "max_wall_time_s": pick(
            getattr(args, "max_wall_time", None), "PKGWAVE_MAX_WALL_TIME_S", 14_400.0, float
        ),
    }


def _write_json(path, obj) -> None:
    with open(path, "w", newline="\n") as f:
        json.dump(obj, f, indent=2, sort_keys=True)
        f.write("\n")


def _write_positions(path, feeds) -> None:
    with open(path, "w", newline="\n") as f:
        f.write("port,x_m,y_m,z_m\n")
        for p, (x, y, z) in enumerate(feeds, start=1):
            f.write(f"{p},{x!r},{y!r},{z!r}\n")


def _read_positions(path) -> list[tuple[float, float, float]]:
    rows = []
    with open(path) as f:
        header = f.readline()
        if header.strip() != "port,x_m,y_m,z_m":
            raise ValueError(f"{path}: expected header 'port,x_m,y_m,z_m'")
        for lineno, line in enumerate(f, start=2):
            if not line.strip():
                continue
            parts = line.strip().split(",")
            if len(parts) != 4:
                raise ValueError(f"{path}:{lineno}: expected 4 columns")
            rows.append((int(parts[0]), float(parts[1]), float(parts[2]), float(parts[3])))
    rows.sort()
    if [r[0] for r in rows] != list(range(1, len(rows) + 1)):
        raise ValueError(f"{path}: ports must be numbered 1..N without gaps")
    return [(x, y, z) for _, x, y, z in rows]


def _scenario_from_args(args):
    if getattr(args, "scenario", None):
        return load_scenario(args.scenario)
    if getattr(args, "preset", None):
        if getattr(args, "desk", False):
            return desk_scenario(args.preset)
        return make_scenario(args.preset)
    raise ValueError("provide --scenario FILE or --preset NAME")


def _analyze_to_dir(ts_path, positions_path, band, averaging, out_dir):
    """Shared analysis path for cmd_analyze and cmd_simulate so that a
    re-analysis of the written Touchstone reproduces report.json exactly."""
    data = read_touchstone(ts_path)
    sp = SParameterSet(data.freqs_hz, data.s, data.z0)
    feeds = _read_positions(positions_path) if positions_path else None
    if feeds is not None and len(feeds) != sp.n_ports:
        raise ValueError(
            f"positions file lists {len(feeds)} ports, Touchstone has {sp.n_ports}"
        )
    prov = {
        "artifact_version": __version__,
        "touchstone_sha256": _sha256(ts_path),
        "positions_sha256": _sha256(positions_path) if positions_path else None,
    }
    report = scenario_report(sp, feed_points=feeds, band=band, averaging=averaging, provenance=prov)
    write_report_files(report, out_dir)
    return report


# ----------------------------------------------------------------------
# subcommands

def cmd_simulate(args) -> int:
    scenario = _scenario_from_args(args)
    problems = validate_scenario(scenario)
    if problems:
        raise ValueError("invalid scenario: " + "; ".join(problems))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    budget = _budget(args)
    policy = RunPolicy(max_steps=args.max_steps)
    est, violations = check_budget(scenario, args.resolution, policy, PmlConfig(), **budget)
    _write_json(out / "cost_estimate.json", est)
    if violations:
        raise BudgetExceeded("; ".join(violations))

    if args.tune:
        log.info("tuning monopole...")
        tr = tune_monopole(scenario, resolution=args.resolution)
        scenario = tr.scenario
        _write_json(
            out / "tune.json",
            {"length_m": tr.length, "s11_db": tr.s11_db, "iterations": tr.iterations},
        )
        log.info("tuned length %.4g m, S11 %.2f dB", tr.length, tr.s11_db)

    outcome = simulate_scenario(
        scenario,
        resolution=args.resolution,
        n_freqs=args.n_freqs,
        run_policy=policy,
        averaging=args.averaging,
    )
    n = outcome.sparams.n_ports
    ts_path = out / f"result.s{n}p"
    write_touchstone(
        ts_path,
        outcome.sparams.freqs,
        outcome.sparams.s,
        z0=scenario.port_impedance,
        comments=[
            f"pkgwave {__version__}",
            f"scenario {scenario.content_hash()} ({scenario.name})",
        ],
    )
    _write_positions(out / "positions.csv", scenario.antenna_feed_points())
    save_scenario(scenario, out / "scenario.scn")
    _write_json(out / "provenance.json", outcome.provenance)
    _write_json(out / "run_log.json", {"runs": outcome.run_stats})
    # report.json comes from re-reading the Touchstone file so that
    # `analyze` on the same inputs is bit-identical
    band = (scenario.band.f_min, scenario.band.f_max)
    _analyze_to_dir(ts_path, out / "positions.csv", band, args.averaging, out)
    if not outcome.converged:
        log.warning("one or more runs hit the step cap before ring-down")
        return EXIT_UNCONVERGED
    return EXIT_OK


def cmd_analyze(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.fit and not args.positions:
        raise ValueError("--fit requires --positions (antenna coordinates sidecar)")
    band = None
    if args.band:
        band = (args.band[0] * 1e9, args.band[1] * 1e9)
    _analyze_to_dir(args.touchstone, args.positions, band, args.averaging, out)
    return EXIT_OK


def cmd_tune(args) -> int:
    scenario = _scenario_from_args(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    tr = tune_monopole(scenario, resolution=args.resolution)
    _write_json(
        out / "tune.json",
        {
            "length_m": tr.length,
            "s11_db": tr.s11_db,
            "iterations": tr.iterations,
            "evaluations": [[L, v] for L, v in tr.evaluations],
            "matched": tr.s11_db <= -10.0,
        },
    )
    save_scenario(tr.scenario, out / "scenario_tuned.scn")
    print(f"tuned length {tr.length * 1e6:.1f} um, |S11(f_center)| {tr.s11_db:.2f} dB")
    if tr.s11_db > -10.0:
        log.warning("tuned monopole fails the -10 dB match target")
    return EXIT_OK


def cmd_sweep(args) -> int:
    plan = load_sweep_plan(args.plan)
    budget = _budget(args)
    result = run_sweep(plan, args.out, max_memory_bytes=budget["max_memory_bytes"])
    done = result.successful()
    log.info("sweep finished: %d/%d points succeeded", len(done), len(result.records))
    if any(r.converged is False for r in done):
        return EXIT_UNCONVERGED
    return EXIT_OK


def cmd_validate(args) -> int:
    scenario = load_scenario(args.scenario)
    problems = validate_scenario(scenario)
    if problems:
        for p in problems:
            print(f"invalid: {p}", file=sys.stderr)
        return EXIT_INVALID
    print(f"ok: {scenario.name} ({scenario.n_ports} ports, hash {scenario.content_hash()[:12]})")
    return EXIT_OK


# ----------------------------------------------------------------------
# figure reproduction

_SI_MM = 1e-3

_FIG_SWEEPS = {
    "fig3a": dict(
        preset="single_chip_walled",
        axes=(("silicon_thickness", (0.1e-3, 0.25e-3, 0.4e-3, 0.55e-3, 0.7e-3)),),
    ),
    "fig3b": dict(
        preset="single_chip_walled",
        axes=(("spreader_thickness", (0.0, 0.4e-3, 0.8e-3)),),
    ),
    "fig6a": dict(
        preset="single_chip_walled",
        axes=(
            ("silicon_thickness", (0.1e-3, 0.2e-3, 0.4e-3, 0.7e-3)),
            ("spreader_thickness", (0.0, 0.4e-3, 0.8e-3)),
        ),
    ),
}
_FIG_SWEEPS["fig6b"] = _FIG_SWEEPS["fig6a"]

FIGURE_IDS = (
    "fig3a", "fig3b", "fig5", "fig6a", "fig6b", "fig8", "fig9",
    "fig10a", "fig10b", "fig11",
)


def _desk_plan(fig: str) -> SweepPlan:
    cfg = _FIG_SWEEPS[fig]
    from .desk import DESK_OVERRIDES

    overrides = dict(DESK_OVERRIDES[cfg["preset"]])
    # sweeps reuse 2x2 ports: the objective is s_min, not a distance fit
    overrides["antennas_per_chip"] = "2x2"
    return SweepPlan(
        preset=cfg["preset"],
        axes=cfg["axes"],
        overrides=overrides,
        resolution=DESK_RESOLUTION,
    )


def _full_plan(fig: str) -> SweepPlan:
    cfg = _FIG_SWEEPS[fig]
    return SweepPlan(preset=cfg["preset"], axes=cfg["axes"], resolution=15, max_points=500)


def _full_scale_estimate(scenarios, out: Path, resolution: int = 15) -> int:
    """Full scale: emit the cost estimate and stop unless budgets allow."""
    rows = []
    for scen in scenarios:
        est, violations = check_budget(
            scen,
            resolution,
            RunPolicy(),
            PmlConfig(),
            max_cells=40_000_000,
            max_memory_bytes=16_000_000_000,
            max_wall_time_s=14_400.0,
        )
        rows.append({"scenario": scen.name, "estimate": est, "budget_violations": violations})
    _write_json(out / "cost_estimate.json", {"resolution": resolution, "scenarios": rows})
    print(f"full-scale plan written to {out}/cost_estimate.json; "
          "raise budgets and run simulate/sweep directly to execute")
    return EXIT_OK


def _fig_scenarios(fig: str, scale: str):
    """Scenario list for non-sweep figures."""
    desk = scale == "desk"
    mk = desk_scenario if desk else make_scenario
    if fig in ("fig8",):
        return [mk("single_chip_walled")]
    if fig == "fig9":
        return [mk("interposer_2x2"), mk("mcm_2x2")]
    if fig == "fig10a":
        return [mk("interposer_2x2")]
    if fig == "fig10b":
        return [mk("mcm_2x2")]
    raise ValueError(fig)


def _reproduce_sweep_fig(fig: str, scale: str, out: Path) -> int:
    if scale == "full":
        plan = _full_plan(fig)
        scens = [make_scenario(plan.preset)]
        return _full_scale_estimate(scens, out)
    plan = _desk_plan(fig)
    result = run_sweep(plan, out)
    summary: dict = {"figure": fig, "scale": scale, "points": len(result.records)}
    by_params = {tuple(sorted(r.params.items())): r for r in result.successful()}
    if fig == "fig3a":
        lo = by_params.get((("silicon_thickness", 0.1e-3),))
        hi = by_params.get((("silicon_thickness", 0.7e-3),))
        if lo and hi:
            summary["s_min_gap_db_0p1_vs_0p7"] = lo.s_min_db - hi.s_min_db
            summary["thinner_silicon_better"] = lo.s_min_db > hi.s_min_db
    elif fig == "fig3b":
        lo = by_params.get((("spreader_thickness", 0.0),))
        hi = by_params.get((("spreader_thickness", 0.8e-3),))
        if lo and hi:
            summary["s_min_gain_db_spreader"] = hi.s_min_db - lo.s_min_db
            summary["spreader_helps"] = hi.s_min_db > lo.s_min_db
    elif fig in ("fig6a", "fig6b"):
        baseline = {"silicon_thickness": 0.2e-3, "spreader_thickness": 0.8e-3}
        opt = report_optimum(result, baseline)
        summary["optimum"] = opt.params
        summary["improvement_db_over_baseline"] = opt.improvement_db
        if fig == "fig6b":
            base = by_params[tuple(sorted(baseline.items()))]
            with open(out / "improvement.csv", "w", newline="\n") as f:
                f.write("silicon_mm,spreader_mm,improvement_dB\n")
                for r in result.successful():
                    f.write(
                        f"{r.params['silicon_thickness'] / _SI_MM!r},"
                        f"{r.params['spreader_thickness'] / _SI_MM!r},"
                        f"{r.s_min_db - base.s_min_db!r}\n"
                    )
    _write_json(out / "summary.json", summary)
    return EXIT_OK


def _reproduce_fig5(scale: str, out: Path) -> int:
    centers = (60e9, 80e9, 100e9)
    if scale == "full":
        scens = [
            make_scenario("single_chip_walled", band=Band(fc * 0.9, fc * 1.1, fc))
            for fc in centers
        ]
        return _full_scale_estimate(scens, out)
    minima = {}
    for fc in centers:
        scen = desk_scenario(
            "single_chip_walled", band=Band(fc * (1 - 1 / 6), fc * (1 + 1 / 6), fc)
        )
        tr = tune_monopole(scen, resolution=DESK_RESOLUTION)
        grid = generate_mesh(tr.scenario, resolution=DESK_RESOLUTION)
        sim = Simulation(grid, tr.scenario, excited_port=0)
        res = sim.run(RunPolicy())
        freqs = np.linspace(scen.band.f_min, scen.band.f_max, 201)
        rl = return_loss_curve(res.ports[0], freqs, scen.port_impedance)
        name = f"return_loss_{int(fc / 1e9)}GHz.csv"
        with open(out / name, "w", newline="\n") as f:
            f.write("f_GHz,S11_dB\n")
            for fv, dv in zip(freqs, rl):
                f.write(f"{float(fv / 1e9)!r},{float(dv)!r}\n")
        minima[f"{int(fc / 1e9)}GHz"] = {
            "tuned_length_um": tr.length * 1e6,
            "min_s11_db": float(np.min(rl)),
            "matched": bool(np.min(rl) <= -10.0),
        }
    _write_json(out / "summary.json", {"figure": "fig5", "scale": scale, "curves": minima})
    return EXIT_OK


def _reproduce_pathloss_fig(fig: str, scale: str, out: Path) -> int:
    scens = _fig_scenarios(fig, scale)
    if scale == "full":
        return _full_scale_estimate(scens, out)
    summary: dict = {"figure": fig, "scale": scale, "fits": {}}
    for scen in scens:
        tr = tune_monopole(scen, resolution=DESK_RESOLUTION)
        outcome = simulate_scenario(tr.scenario, resolution=DESK_RESOLUTION)
        sub = out / scen.name
        write_report_files(outcome.report, sub)
        write_touchstone(
            sub / f"result.s{outcome.sparams.n_ports}p",
            outcome.sparams.freqs,
            outcome.sparams.s,
            z0=scen.port_impedance,
            comments=[f"pkgwave {__version__}", f"scenario {tr.scenario.content_hash()}"],
        )
        fit = outcome.report.fit
        summary["fits"][scen.name] = None if fit is None else {"n": fit.n, "c_db": fit.c}
    if fig == "fig9":
        names = [s.name for s in scens]
        n_ip = summary["fits"][names[0]]["n"]
        n_mcm = summary["fits"][names[1]]["n"]
        summary["mcm_exponent_larger"] = n_mcm > n_ip
    _write_json(out / "summary.json", summary)
    return EXIT_OK


def _reproduce_fig11(scale: str, out: Path) -> int:
    if scale == "full":
        return _full_scale_estimate([make_scenario("single_chip_walled")], out)
    from .desk import DESK_OVERRIDES

    overrides = dict(DESK_OVERRIDES["single_chip_walled"])
    overrides["antennas_per_chip"] = "2x2"
    plan = SweepPlan(
        preset="single_chip_walled",
        axes=(("f_center", (60e9, 80e9, 100e9)),),
        overrides=overrides,
        resolution=DESK_RESOLUTION,
    )
    rows = frequency_scaling(plan, out)
    with open(out / "s_min_vs_frequency.csv", "w", newline="\n") as f:
        f.write("f_GHz,tuned_length_um,s_min_dB\n")
        for fc, length, smin in rows:
            f.write(f"{float(fc / 1e9)!r},{float(length * 1e6)!r},{float(smin)!r}\n")
    trend = all(b[2] <= a[2] + 1e-9 for a, b in zip(rows, rows[1:]))
    _write_json(
        out / "summary.json",
        {"figure": "fig11", "scale": scale, "rows": len(rows), "non_increasing": trend},
    )
    return EXIT_OK


def cmd_reproduce(args) -> int:
    if args.figure not in FIGURE_IDS:
        raise ValueError(f"unknown figure id {args.figure!r}; known: {FIGURE_IDS}")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    fig = args.figure
    if fig in _FIG_SWEEPS:
        return _reproduce_sweep_fig(fig, args.scale, out)
    if fig == "fig5":
        return _reproduce_fig5(args.scale, out)
    if fig in ("fig8", "fig9", "fig10a", "fig10b"):
        return _reproduce_pathloss_fig(fig, args.scale, out)
    return _reproduce_fig11(args.scale, out)


# ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="pkgwave",
        description="In-package mm-wave channel characterization (FDTD)",
    )
    p.add_argument("--log-level", default="info", choices=("debug", "info", "warning", "error"))
    sub = p.add_subparsers(dest="command", required=True)

    def add_budget(sp):
        sp.add_argument("--max-cells", type=int, default=None)
        sp.add_argument("--max-memory", type=int, default=None, help="bytes")
        sp.add_argument("--max-wall-time", type=float, default=None, help="seconds")

    def add_scenario_source(sp):
        sp.add_argument("--scenario", help="scenario file (.scn)")
        sp.add_argument("--preset", help="built-in preset name")
        sp.add_argument("--desk", action="store_true", help="apply the desk-scale mapping to --preset")

    sp = sub.add_parser("simulate", help="scenario -> Touchstone + report")
    add_scenario_source(sp)
    sp.add_argument("--out", required=True)
    sp.add_argument("--resolution", type=int, default=DESK_RESOLUTION)
    sp.add_argument("--n-freqs", type=int, default=201)
    sp.add_argument("--tune", action="store_true", help="retune the monopole first")
    sp.add_argument("--averaging", default="power", choices=("power", "db"))
    sp.add_argument("--max-steps", type=int, default=60_000)
    add_budget(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("analyze", help="existing Touchstone -> channel report")
    sp.add_argument("--touchstone", required=True)
    sp.add_argument("--positions", help="CSV sidecar: port,x_m,y_m,z_m")
    sp.add_argument("--out", required=True)
    sp.add_argument("--band", type=float, nargs=2, metavar=("F_MIN_GHZ", "F_MAX_GHZ"))
    sp.add_argument("--averaging", default="power", choices=("power", "db"))
    sp.add_argument("--fit", action="store_true", help="require a path-loss fit")
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("tune", help="tune the monopole length")
    add_scenario_source(sp)
    sp.add_argument("--out", required=True)
    sp.add_argument("--resolution", type=int, default=DESK_RESOLUTION)
    sp.set_defaults(func=cmd_tune)

    sp = sub.add_parser("sweep", help="run a parametric sweep plan")
    sp.add_argument("--plan", required=True)
    sp.add_argument("--out", required=True)
    add_budget(sp)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("validate", help="check a scenario file (no side effects)")
    sp.add_argument("--scenario", required=True)
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("reproduce", help="rebuild a study's plot data")
    sp.add_argument("figure", choices=FIGURE_IDS)
    sp.add_argument("--scale", default="desk", choices=("desk", "full"))
    sp.add_argument("--out", required=True)
    add_budget(sp)
    sp.set_defaults(func=cmd_reproduce)
    return p


def _error_json(args, exc, code) -> None:
    out = getattr(args, "out", None)
    if not out:
        return
    try:
        Path(out).mkdir(parents=True, exist_ok=True)
        _write_json(
            Path(out) / "error.json",
            {"error": type(exc).__name__, "message": str(exc), "exit_code": code},
        )
    except OSError:
        pass


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, args.log_level.upper()),
        format="%(asctime)s %(levelname)s %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except BudgetExceeded as exc:
        log.error("budget refusal: %s", exc)
        _error_json(args, exc, EXIT_BUDGET)
        return EXIT_BUDGET
    except SolverError as exc:
        log.error("solver failure: %s", exc)
        _error_json(args, exc, EXIT_SOLVER)
        return EXIT_SOLVER
    except SweepError as exc:
        log.error("sweep failure: %s", exc)
        _error_json(args, exc, EXIT_SOLVER)
        return EXIT_SOLVER
    except (ScenarioFileError, TouchstoneError, ValueError, KeyError, FileNotFoundError) as exc:
        log.error("invalid input: %s", exc)
        _error_json(args, exc, EXIT_INVALID)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
