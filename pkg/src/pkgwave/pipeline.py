"""End-to-end orchestration of one scenario: mesh, one excitation run per
port, S-parameter extraction, and the analysis report, with full
provenance carried into every artifact."""

from __future__ import annotations

from dataclasses import dataclass, field


from . import __version__ as _version
from .channel import ScenarioReport, scenario_report
from .geometry import PackageScenario
from .mesh import YeeGrid, estimate_cost, generate_mesh, mesh_summary
from .ports import SParameterSet, default_frequencies, extract_sparams
from .solver import PmlConfig, RunPolicy, Simulation


@dataclass
class SimulationOutcome:
    sparams: SParameterSet
    report: ScenarioReport
    converged: bool
    run_stats: list[dict]
    grid: YeeGrid
    provenance: dict = field(default_factory=dict)


def build_provenance(scenario: PackageScenario, grid: YeeGrid, settings: dict | None = None) -> dict:
    return {
        "artifact_version": _version,
        "scenario_hash": scenario.content_hash(),
        "scenario_name": scenario.name,
        "mesh": mesh_summary(grid),
        "solver_settings": settings or {},
    }


def predicted_run_time(scenario: PackageScenario, policy: RunPolicy, grid: YeeGrid) -> float:
    """Upper-bound simulated time for budgeting: the step cap."""
    return policy.max_steps * grid.dt


def simulate_scenario(
    scenario: PackageScenario,
    resolution: int = 10,
    n_freqs: int = 201,
    run_policy: RunPolicy | None = None,
    pml: PmlConfig | None = None,
    averaging: str = "power",
    grid: YeeGrid | None = None,
    max_cells: int | None = None,
) -> SimulationOutcome:
    """Run the full pipeline: one solver run per excited port, then the
    S-matrix and channel report."""
    if scenario.n_ports < 1:
        raise ValueError("scenario has no antennas to excite")
    policy = run_policy or RunPolicy()
    pml = pml or PmlConfig()
    if grid is None:
        grid = generate_mesh(scenario, resolution=resolution, max_cells=max_cells)
    band = scenario.band
    freqs = default_frequencies(band.f_min, band.f_max, n_freqs)

    records = {}
    run_stats = []
    converged = True
    settings = None
    for j in range(scenario.n_ports):
        sim = Simulation(grid, scenario, excited_port=j, pml=pml)
        result = sim.run(policy)
        if settings is None:
            settings = result.settings
        records[j] = result.ports
        converged = converged and result.converged
        run_stats.append(
            {
                "excited_port": j,
                "steps": result.steps,
                "converged": result.converged,
                "wall_time_s": result.wall_time_s,
                "cells_per_second": result.cells_per_second,
            }
        )
    sparams = extract_sparams(records, freqs, scenario.port_impedance)
    prov = build_provenance(scenario, grid, settings)
    prov["converged"] = converged
    sparams.metadata.update(prov)
    report = scenario_report(
        sparams,
        feed_points=scenario.antenna_feed_points(),
        band=(band.f_min, band.f_max),
        averaging=averaging,
        provenance=prov,
    )
    return SimulationOutcome(
        sparams=sparams,
        report=report,
        converged=converged,
        run_stats=run_stats,
        grid=grid,
        provenance=prov,
    )


def check_budget(
    scenario: PackageScenario,
    resolution: int,
    policy: RunPolicy,
    pml: PmlConfig,
    max_cells: int | None = None,
    max_memory_bytes: int | None = None,
    max_wall_time_s: float | None = None,
    throughput_cells_per_s: float = 1.5e8,
) -> tuple[dict, list[str]]:
    """Cost estimate plus the list of violated budget limits (empty = ok)."""
    grid = generate_mesh(scenario, resolution=resolution, max_cells=None)
    npml = pml.thickness_cells
    lateral = scenario.lateral_boundary.kind == "absorbing_open"
    pad = (npml, npml, npml, npml, 0, npml) if lateral else (0, 0, 0, 0, 0, 0)
    est = estimate_cost(grid, predicted_run_time(scenario, policy, grid), pml_pad=pad)
    est["runs"] = scenario.n_ports
    est["wall_time_estimate_s"] = (
        est["cell_count"] * est["step_count"] * scenario.n_ports / throughput_cells_per_s
    )
    violations = []
    if max_cells is not None and est["cell_count"] > max_cells:
        violations.append(f"cells {est['cell_count']} > budget {max_cells}")
    if max_memory_bytes is not None and est["memory_bytes"] > max_memory_bytes:
        violations.append(f"memory {est['memory_bytes']} B > budget {max_memory_bytes} B")
    if max_wall_time_s is not None and est["wall_time_estimate_s"] > max_wall_time_s:
        violations.append(
            f"estimated wall time {est['wall_time_estimate_s']:.0f} s > budget {max_wall_time_s:.0f} s"
        )
    return est, violations
