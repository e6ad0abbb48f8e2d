"""Full-wave characterization of mm-wave wireless channels inside
flip-chip computing packages.

Layers: package geometry and material stack description, nonuniform
Yee-grid meshing, an FDTD solver with CPML/PEC boundaries and lumped
resistive ports, S-parameter extraction and monopole tuning, channel
metrics (band averages, worst-pair coupling, path-loss regression),
parametric sweeps, and a command-line front end.
"""

__version__ = "0.1.0"

from .constants import C0, EPS0, ETA0, MU0
from .geometry import (
    Band,
    ChipPlacement,
    LateralBoundary,
    Layer,
    LayerRole,
    MonopoleSpec,
    PackageScenario,
    antenna_grid,
    build_default_stack,
    make_scenario,
    scenario_from_dict,
    validate_scenario,
    with_monopole_length,
)
from .channel import (
    PathLossFit,
    ScenarioReport,
    band_average,
    channel_response,
    fit_path_loss,
    path_loss_db,
    s_min,
    scenario_report,
    write_report_files,
)
from .desk import DESK_RESOLUTION, desk_scenario
from .materials import Material, get_material, tan_delta_to_sigma
from .mesh import YeeGrid, estimate_cost, generate_mesh
from .pipeline import SimulationOutcome, check_budget, simulate_scenario
from .ports import (
    PortRecord,
    SParameterSet,
    TuneResult,
    extract_sparams,
    return_loss_curve,
    tune_monopole,
)
from .scenario_io import load_scenario, save_scenario
from .solver import (
    PmlConfig,
    RunPolicy,
    RunResult,
    Simulation,
    SolverError,
    SourceWaveform,
)
from .sweep import (
    SweepPlan,
    SweepResult,
    frequency_scaling,
    load_sweep_plan,
    report_optimum,
    run_sweep,
)
from .touchstone import read_touchstone, write_touchstone
