"""Reference scenarios with analytically known behavior, used by the
acceptance suite: monopoles over a ground plane in open vacuum (free-space
path loss, n ~ 2) and the same antennas inside a parallel-plate guide
(n below 2)."""


from pkgwave.constants import C0
from pkgwave.geometry import (
    Band,
    ChipPlacement,
    Layer,
    LayerRole,
    LateralBoundary,
    MonopoleSpec,
    PackageScenario,
    validate_scenario,
)
from pkgwave.materials import ALUMINUM, BUMP_METAL, VACUUM

BAND = Band(50e9, 70e9, 60e9)
LAMBDA0 = C0 / BAND.f_center  # ~5 mm


def ground_plane_scenario(
    name: str,
    antennas_xy,
    package_xy,
    gap_height: float,
    monopole_length: float,
    top_plate: bool = False,
    band: Band = BAND,
    ground_thickness: float = 0.6e-3,
) -> PackageScenario:
    """Monopoles on a PEC ground sheet under a vacuum region.

    With top_plate=False the region above is open (absorbed laterally and
    on top); with top_plate=True a PEC lid turns it into a parallel-plate
    guide of height gap_height.
    """
    stack = [
        Layer(BUMP_METAL, ground_thickness, LayerRole.BUMP_SHEET),
        Layer(VACUUM, gap_height, LayerRole.VACUUM_GAP),
    ]
    if top_plate:
        stack.append(Layer(ALUMINUM, 0.3e-3, LayerRole.HEAT_SINK))
    px, py = package_xy
    chip = ChipPlacement((0.0, 0.0), (px, py), tuple(antennas_xy))
    scen = PackageScenario(
        name=name,
        stack=tuple(stack),
        chips=(chip,),
        lateral_boundary=LateralBoundary("absorbing_open"),
        package_size_xy=(px, py),
        band=band,
        monopole=MonopoleSpec(length=monopole_length),
    )
    problems = validate_scenario(scen)
    if problems:
        raise ValueError("; ".join(problems))
    return scen


def line_of_monopoles(margin: float, separations, y: float):
    """Antenna coordinates along a line: one at x=margin plus one at each
    cumulative separation."""
    xs = [margin] + [margin + s for s in separations]
    return [(x, y, 0.0) for x in xs]


def free_space_scenario(monopole_length: float | None = None) -> PackageScenario:
    """Four monopoles over a ground plane in open vacuum; the pairwise
    separations {3, 4, 7, 10} wavelengths sample the free-space decade."""
    margin = 2 * LAMBDA0
    seps = (3 * LAMBDA0, 7 * LAMBDA0, 10 * LAMBDA0)
    px = 2 * margin + seps[-1]
    py = 2 * margin
    pts = line_of_monopoles(margin, seps, py / 2)
    length = monopole_length if monopole_length is not None else 0.24 * LAMBDA0
    return ground_plane_scenario(
        "free_space_line",
        [(x, y) for x, y, _ in pts],
        (px, py),
        gap_height=1.5 * LAMBDA0,
        monopole_length=length,
    )


def parallel_plate_scenario(monopole_length: float | None = None) -> PackageScenario:
    """The same four-monopole line inside a PEC parallel-plate guide."""
    margin = 2 * LAMBDA0
    seps = (3 * LAMBDA0, 7 * LAMBDA0, 10 * LAMBDA0)
    px = 2 * margin + seps[-1]
    py = 2 * margin
    pts = line_of_monopoles(margin, seps, py / 2)
    gap = 0.3 * LAMBDA0
    length = monopole_length if monopole_length is not None else 0.8 * gap
    return ground_plane_scenario(
        "parallel_plate_line",
        [(x, y) for x, y, _ in pts],
        (px, py),
        gap_height=gap,
        monopole_length=length,
        top_plate=True,
    )


def vacuum_tuning_scenario(band: Band = BAND) -> PackageScenario:
    """A single monopole over ground in open vacuum, small footprint:
    the textbook quarter-wave (0.24 lambda) tuning oracle.

    The vacuum gap is kept to 0.6 lambda so the tuner's length bracket
    (fractions of the gap) contains only the quarter-wave branch; a taller
    gap would let the search settle on the better-matched 3/4-wave
    resonance instead.
    """
    lam = C0 / band.f_center
    side = 1.6 * lam
    return ground_plane_scenario(
        "vacuum_monopole",
        [(side / 2, side / 2)],
        (side, side),
        gap_height=0.6 * lam,
        monopole_length=0.24 * lam,
        band=band,
    )
