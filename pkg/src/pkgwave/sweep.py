"""Parametric studies with per-point monopole retuning.

A sweep is a cartesian grid over scenario parameters (layer thicknesses,
center frequency, ...).  Every point gets its own subdirectory with the
Touchstone matrix and analysis report; a manifest JSON indexes completed
points so an interrupted sweep resumes exactly where it stopped, and a
lock file rejects concurrent sweeps over the same directory.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import os
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

from .channel import write_report_files
from .geometry import Band, PackageScenario, make_scenario
from .pipeline import check_budget, simulate_scenario
from .ports import tune_monopole
from .scenario_io import ScenarioFileError, _parse_blocks, parse_quantity
from .solver import PmlConfig, RunPolicy
from .touchstone import write_touchstone

# Parameters a sweep axis may address.  Thickness/geometry names map to
# make_scenario keyword arguments; f_center rescales the band around the
# new center at constant fractional bandwidth.
AXIS_PARAMS = (
    "silicon_thickness",
    "spreader_thickness",
    "interconnect_thickness",
    "bump_thickness",
    "chip_size",
    "chip_separation",
    "wall_offset",
    "f_center",
)


class SweepError(RuntimeError):
    pass


@dataclass(frozen=True)
class SweepPlan:
    preset: str
    axes: tuple[tuple[str, tuple[float, ...]], ...]
    overrides: dict = field(default_factory=dict)
    retune: bool = True
    resolution: int = 10
    objective: str = "s_min"
    averaging: str = "power"
    n_freqs: int = 201
    max_points: int = 400

    def __post_init__(self):
        if not self.axes:
            raise ValueError("sweep needs at least one axis")
        for name, values in self.axes:
            if name not in AXIS_PARAMS:
                raise ValueError(f"unknown sweep parameter {name!r}; known: {AXIS_PARAMS}")
            if not values:
                raise ValueError(f"axis {name} has no values")
            if list(values) != sorted(values):
                raise ValueError(f"axis {name} values must be sorted ascending")
        if self.objective != "s_min":
            raise ValueError(f"unknown objective {self.objective!r}")
        n = 1
        for _, values in self.axes:
            n *= len(values)
        if n > self.max_points:
            raise ValueError(f"plan has {n} points, exceeding the {self.max_points}-point budget")

    def points(self) -> list[dict]:
        names = [a[0] for a in self.axes]
        return [
            dict(zip(names, combo))
            for combo in itertools.product(*(a[1] for a in self.axes))
        ]

    def to_dict(self) -> dict:
        overrides = {
            k: ([v.f_min, v.f_max, v.f_center] if isinstance(v, Band) else v)
            for k, v in sorted(self.overrides.items())
        }
        return {
            "preset": self.preset,
            "axes": [[n, list(v)] for n, v in self.axes],
            "overrides": overrides,
            "retune": self.retune,
            "resolution": self.resolution,
            "objective": self.objective,
            "averaging": self.averaging,
            "n_freqs": self.n_freqs,
        }


def point_id(params: dict) -> str:
    blob = json.dumps(params, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


def build_point_scenario(plan: SweepPlan, params: dict) -> PackageScenario:
    kwargs = dict(plan.overrides)
    for name, value in params.items():
        if name == "f_center":
            base = kwargs.get("band")
            if base is not None and not isinstance(base, Band):
                base = Band(*base)
            if base is None:
                base = _default_band()
            half_frac = 0.5 * (base.f_max - base.f_min) / base.f_center
            kwargs["band"] = Band(value * (1 - half_frac), value * (1 + half_frac), value)
        else:
            kwargs[name] = value
    scen = make_scenario(plan.preset, **kwargs)
    suffix = "_".join(f"{k}={v:g}" for k, v in sorted(params.items()))
    return replace(scen, name=f"{scen.name}__{suffix}")


def _default_band() -> Band:
    from .geometry import _DEFAULT_BAND

    return _DEFAULT_BAND


@dataclass
class PointRecord:
    params: dict
    status: str  # "done" | "failed"
    s_min_db: float | None = None
    tuned_length_m: float | None = None
    converged: bool | None = None
    wall_time_s: float | None = None
    error: str | None = None
    directory: str | None = None


@dataclass
class SweepResult:
    plan: SweepPlan
    records: list[PointRecord]

    def successful(self) -> list[PointRecord]:
        return [r for r in self.records if r.status == "done"]

    @property
    def argmax(self) -> PointRecord:
        best = max(self.successful(), key=lambda r: r.s_min_db, default=None)
        if best is None:
            raise SweepError("no successful sweep points")
        return best


def default_runner(
    scenario: PackageScenario,
    plan: SweepPlan,
    run_policy: RunPolicy | None = None,
    pml: PmlConfig | None = None,
) -> dict:
    """Tune (optionally), simulate all excitations, and report one point."""
    tuned_length = scenario.monopole.length
    if plan.retune:
        tr = tune_monopole(scenario, resolution=plan.resolution)
        scenario = tr.scenario
        tuned_length = tr.length
    outcome = simulate_scenario(
        scenario,
        resolution=plan.resolution,
        n_freqs=plan.n_freqs,
        run_policy=run_policy,
        pml=pml,
        averaging=plan.averaging,
    )
    return {
        "s_min_db": outcome.report.metrics.s_min_db,
        "tuned_length_m": tuned_length,
        "converged": outcome.converged,
        "sparams": outcome.sparams,
        "report": outcome.report,
        "provenance": outcome.provenance,
    }


class _Lock:
    def __init__(self, directory: Path):
        self.path = directory / "sweep.lock"

    def __enter__(self):
        try:
            fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise SweepError(
                f"sweep directory is locked by {self.path}; remove the file if no "
                "other sweep is running"
            ) from None
        with os.fdopen(fd, "w") as f:
            f.write(str(os.getpid()))
        return self

    def __exit__(self, *exc):
        try:
            os.unlink(self.path)
        except FileNotFoundError:
            pass


def _write_manifest(path: Path, manifest: dict) -> None:
    tmp = path.with_suffix(".tmp")
    with open(tmp, "w", newline="\n") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")
    os.replace(tmp, path)


def run_sweep(
    plan: SweepPlan,
    out_dir,
    runner=None,
    max_memory_bytes: int | None = None,
    run_policy: RunPolicy | None = None,
) -> SweepResult:
    """Execute (or resume) a sweep.  Per-point failures are recorded and
    the sweep continues; the call fails only if every point failed."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest_path = out / "manifest.json"
    points = plan.points()

    with _Lock(out):
        if manifest_path.exists():
            with open(manifest_path) as f:
                manifest = json.load(f)
            if manifest.get("plan") != plan.to_dict():
                raise SweepError(f"{manifest_path} belongs to a different plan")
        else:
            manifest = {"plan": plan.to_dict(), "points": {}}
            _write_manifest(manifest_path, manifest)

        for params in points:
            pid = point_id(params)
            if pid in manifest["points"]:
                continue
            record = {"params": params}
            t0 = time.perf_counter()
            try:
                scenario = build_point_scenario(plan, params)
                if runner is None and max_memory_bytes is not None:
                    _, violations = check_budget(
                        scenario,
                        plan.resolution,
                        run_policy or RunPolicy(),
                        PmlConfig(),
                        max_memory_bytes=max_memory_bytes,
                    )
                    if violations:
                        raise SweepError("budget refusal: " + "; ".join(violations))
                result = (runner or default_runner)(scenario, plan, run_policy=run_policy)
                point_dir = out / pid
                point_dir.mkdir(exist_ok=True)
                if result.get("sparams") is not None:
                    sp = result["sparams"]
                    n = sp.n_ports
                    write_touchstone(
                        point_dir / f"result.s{n}p",
                        sp.freqs,
                        sp.s,
                        z0=sp.z0,
                        comments=[f"scenario {scenario.content_hash()}"],
                    )
                if result.get("report") is not None:
                    write_report_files(result["report"], point_dir)
                record.update(
                    status="done",
                    s_min_db=result["s_min_db"],
                    tuned_length_m=result.get("tuned_length_m"),
                    converged=result.get("converged"),
                    directory=pid,
                )
            except Exception as exc:  # noqa: BLE001 - per-point isolation is the contract
                record.update(status="failed", error=f"{type(exc).__name__}: {exc}")
            record["wall_time_s"] = time.perf_counter() - t0
            manifest["points"][pid] = record
            _write_manifest(manifest_path, manifest)

    records = []
    for params in points:
        m = manifest["points"][point_id(params)]
        records.append(
            PointRecord(
                params=params,
                status=m["status"],
                s_min_db=m.get("s_min_db"),
                tuned_length_m=m.get("tuned_length_m"),
                converged=m.get("converged"),
                wall_time_s=m.get("wall_time_s"),
                error=m.get("error"),
                directory=m.get("directory"),
            )
        )
    result = SweepResult(plan=plan, records=records)
    if not result.successful():
        raise SweepError("every sweep point failed; see the manifest for errors")
    _write_surface_csv(result, out / "surface.csv")
    return result


def _write_surface_csv(result: SweepResult, path: Path) -> None:
    names = [a[0] for a in result.plan.axes]
    with open(path, "w", newline="\n") as f:
        f.write(",".join(names) + ",s_min_dB,tuned_length_um,status\n")
        for r in result.records:
            vals = ",".join(repr(r.params[n]) for n in names)
            smin = "" if r.s_min_db is None else repr(r.s_min_db)
            tl = "" if r.tuned_length_m is None else repr(r.tuned_length_m * 1e6)
            f.write(f"{vals},{smin},{tl},{r.status}\n")


@dataclass(frozen=True)
class OptimumReport:
    params: dict
    s_min_db: float
    baseline_params: dict
    improvement_db: float


def report_optimum(result: SweepResult, baseline: dict) -> OptimumReport:
    """Best point by the objective, with improvement over a named baseline.

    Ties prefer thinner silicon, then thinner heat spreader.
    """
    ok = result.successful()
    if not ok:
        raise SweepError("no successful sweep points")
    base = next((r for r in ok if r.params == baseline), None)
    if base is None:
        raise SweepError(f"baseline point {baseline} absent or failed")

    def key(r: PointRecord):
        return (
            -r.s_min_db,
            r.params.get("silicon_thickness", float("inf")),
            r.params.get("spreader_thickness", float("inf")),
        )

    best = min(ok, key=key)
    return OptimumReport(
        params=best.params,
        s_min_db=best.s_min_db,
        baseline_params=baseline,
        improvement_db=best.s_min_db - base.s_min_db,
    )


def frequency_scaling(
    plan: SweepPlan,
    out_dir,
    runner=None,
    run_policy: RunPolicy | None = None,
) -> list[tuple[float, float, float]]:
    """Retune and re-run across center frequencies; the plan must have a
    single f_center axis.  Returns (f_center, tuned length, s_min) rows."""
    if [a[0] for a in plan.axes] != ["f_center"]:
        raise ValueError("frequency_scaling expects exactly one axis: f_center")
    result = run_sweep(plan, out_dir, runner=runner, run_policy=run_policy)
    rows = []
    for r in result.records:
        if r.status == "done":
            rows.append((r.params["f_center"], r.tuned_length_m, r.s_min_db))
    return rows


# ----------------------------------------------------------------------
# Plan files share the scenario file dialect: top-level `key = value`
# lines plus one `axis.<param> = v1, v2, ...` line per axis.

_PLAN_KEYS = {
    "preset", "retune", "resolution", "objective", "averaging", "n_freqs",
    "max_points", "silicon", "spreader", "interconnect", "bump", "chip",
    "separation", "wall_offset", "antennas", "band",
}

_OVERRIDE_MAP = {
    "silicon": "silicon_thickness",
    "spreader": "spreader_thickness",
    "interconnect": "interconnect_thickness",
    "bump": "bump_thickness",
    "chip": "chip_size",
    "separation": "chip_separation",
    "wall_offset": "wall_offset",
    "antennas": "antennas_per_chip",
}


def parse_sweep_plan(text: str) -> SweepPlan:
    top, sections = _parse_blocks(text)
    if sections:
        raise ScenarioFileError("sweep plans take no [sections]", sections[0][0])
    fields: dict = {}
    axes: list[tuple[str, tuple[float, ...]]] = []
    overrides: dict = {}
    for line, key, value in top:
        if key.startswith("axis."):
            param = key[5:]
            if param not in AXIS_PARAMS:
                raise ScenarioFileError(f"unknown axis parameter {param!r}", line)
            values = tuple(parse_quantity(v.strip(), line) for v in value.split(","))
            axes.append((param, values))
        elif key in _OVERRIDE_MAP:
            if value.lower() == "none":
                overrides[_OVERRIDE_MAP[key]] = None
            elif key == "antennas":
                overrides[_OVERRIDE_MAP[key]] = value
            else:
                overrides[_OVERRIDE_MAP[key]] = parse_quantity(value, line)
        elif key == "band":
            parts = [parse_quantity(v.strip(), line) for v in value.split(",")]
            if len(parts) != 3:
                raise ScenarioFileError("band needs f_min, f_max, f_center", line)
            overrides["band"] = Band(parts[0], parts[1], parts[2])
        elif key in _PLAN_KEYS:
            fields[key] = value
        else:
            raise ScenarioFileError(f"unknown sweep plan key {key!r}", line)
    if "preset" not in fields:
        raise ScenarioFileError("sweep plan needs a preset")
    kwargs = {"preset": fields["preset"], "axes": tuple(axes), "overrides": overrides}
    if "retune" in fields:
        kwargs["retune"] = fields["retune"].lower() in ("1", "true", "yes", "on")
    for k in ("resolution", "n_freqs", "max_points"):
        if k in fields:
            kwargs[k] = int(fields[k])
    for k in ("objective", "averaging"):
        if k in fields:
            kwargs[k] = fields[k]
    return SweepPlan(**kwargs)


def load_sweep_plan(path) -> SweepPlan:
    with open(path) as f:
        return parse_sweep_plan(f.read())
