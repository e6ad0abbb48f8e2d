"""Declarative package scenarios: layer stack, chip layout, and antennas.

A PackageScenario is a pure value object describing the flip-chip package
independent of any mesh: the vertical layer stack (bottom to top), the chip
footprints with their vertical monopole antennas, the lateral boundary
(conducting walls or an open, absorbing boundary), and the analysis band.

Vertical composition rule used when a scenario is meshed: carrier,
interposer, heat-spreader, heat-sink, and vacuum-gap layers span the full
package footprint; bump-sheet, interconnect, and silicon-die layers exist
only under each chip footprint, with vacuum filling the space between chips
and between chip edges and the walls.
"""

from __future__ import annotations

import enum
import hashlib
import json
import math
from dataclasses import dataclass, replace

from . import materials as mat
from .constants import C0
from .materials import Material


class LayerRole(str, enum.Enum):
    HEAT_SINK = "heat_sink"
    HEAT_SPREADER = "heat_spreader"
    SILICON_DIE = "silicon_die"
    INTERCONNECT = "interconnect"
    BUMP_SHEET = "bump_sheet"
    INTERPOSER = "interposer"
    CARRIER = "carrier"
    VACUUM_GAP = "vacuum_gap"


# Roles restricted to the chip footprint; everything else spans the package.
CHIP_ROLES = {LayerRole.BUMP_SHEET, LayerRole.INTERCONNECT, LayerRole.SILICON_DIE}


@dataclass(frozen=True)
class Layer:
    material: Material
    thickness: float  # m
    role: LayerRole

    def __post_init__(self):
        if self.thickness <= 0:
            raise ValueError(f"layer {self.role.value}: thickness must be > 0")
        if self.role == LayerRole.BUMP_SHEET and not self.material.is_pec:
            raise ValueError("bump_sheet must be a perfect conductor (solid-sheet approximation)")


@dataclass(frozen=True)
class ChipPlacement:
    origin_xy: tuple[float, float]  # m, lower-left corner in package coordinates
    size_xy: tuple[float, float]    # m
    antenna_positions: tuple[tuple[float, float], ...]  # absolute xy, m

    def contains(self, x: float, y: float, strict: bool = True) -> bool:
        x0, y0 = self.origin_xy
        sx, sy = self.size_xy
        if strict:
            return x0 < x < x0 + sx and y0 < y < y0 + sy
        return x0 <= x <= x0 + sx and y0 <= y <= y0 + sy

    def overlaps(self, other: "ChipPlacement") -> bool:
        ax0, ay0 = self.origin_xy
        ax1, ay1 = ax0 + self.size_xy[0], ay0 + self.size_xy[1]
        bx0, by0 = other.origin_xy
        bx1, by1 = bx0 + other.size_xy[0], by0 + other.size_xy[1]
        return ax0 < bx1 and bx0 < ax1 and ay0 < by1 and by0 < ay1


@dataclass(frozen=True)
class MonopoleSpec:
    length: float            # m, height above the ground plane (the one-cell
                             # excitation gap at the base is part of it)
    radius: float = 10e-6    # m, TSV-scale default

    def __post_init__(self):
        if self.length <= 0:
            raise ValueError("monopole length must be > 0")
        if self.radius <= 0:
            raise ValueError("monopole radius must be > 0")


@dataclass(frozen=True)
class LateralBoundary:
    kind: str                 # "pec_walls" | "absorbing_open"
    wall_offset: float = 0.0  # m, chip edge to wall (pec_walls only)

    def __post_init__(self):
        if self.kind not in ("pec_walls", "absorbing_open"):
            raise ValueError(f"unknown lateral boundary {self.kind!r}")


@dataclass(frozen=True)
class Band:
    f_min: float
    f_max: float
    f_center: float

    def __post_init__(self):
        if not (self.f_min < self.f_center < self.f_max):
            raise ValueError("band requires f_min < f_center < f_max")


@dataclass(frozen=True)
class PackageScenario:
    name: str
    stack: tuple[Layer, ...]                 # bottom -> top
    chips: tuple[ChipPlacement, ...]
    lateral_boundary: LateralBoundary
    package_size_xy: tuple[float, float]     # m
    band: Band
    port_impedance: float = 50.0
    monopole: MonopoleSpec = MonopoleSpec(length=0.36e-3)

    @property
    def stack_height(self) -> float:
        return sum(l.thickness for l in self.stack)

    def layer_z_spans(self) -> list[tuple[float, float, Layer]]:
        """(z_bottom, z_top, layer) for every layer, bottom at z=0."""
        spans = []
        z = 0.0
        for layer in self.stack:
            spans.append((z, z + layer.thickness, layer))
            z += layer.thickness
        return spans

    def bump_sheet_top(self) -> float:
        """z of the monopole ground plane (top of the bump sheet)."""
        for z0, z1, layer in self.layer_z_spans():
            if layer.role == LayerRole.BUMP_SHEET:
                return z1
        raise ValueError("scenario has no bump_sheet layer")

    def spreader_ceiling(self) -> float:
        """z of the heat-spreader top: the ceiling a monopole must fit under.

        Without a spreader the silicon top is the ceiling; bare test stacks
        (ground plane in vacuum) fall back to the stack top.
        """
        for role in (LayerRole.HEAT_SPREADER, LayerRole.SILICON_DIE):
            for z0, z1, layer in self.layer_z_spans():
                if layer.role == role:
                    return z1
        return self.stack_height

    def antenna_feed_points(self) -> list[tuple[float, float, float]]:
        """3D feed coordinates of every antenna, chip-major order."""
        z = self.bump_sheet_top()
        return [(x, y, z) for chip in self.chips for (x, y) in chip.antenna_positions]

    @property
    def n_ports(self) -> int:
        return sum(len(c.antenna_positions) for c in self.chips)

    def max_permittivity(self) -> float:
        eps = [l.material.rel_permittivity for l in self.stack if not l.material.is_pec]
        return max(eps) if eps else 1.0

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "stack": [
                {
                    "role": l.role.value,
                    "thickness_m": l.thickness,
                    "material": {
                        "name": l.material.name,
                        "eps_r": l.material.rel_permittivity,
                        "loss": _loss_to_dict(l.material),
                    },
                }
                for l in self.stack
            ],
            "chips": [
                {
                    "origin_xy_m": list(c.origin_xy),
                    "size_xy_m": list(c.size_xy),
                    "antennas_xy_m": [list(p) for p in c.antenna_positions],
                }
                for c in self.chips
            ],
            "lateral_boundary": {
                "kind": self.lateral_boundary.kind,
                "wall_offset_m": self.lateral_boundary.wall_offset,
            },
            "package_size_xy_m": list(self.package_size_xy),
            "band_hz": [self.band.f_min, self.band.f_max, self.band.f_center],
            "port_impedance_ohm": self.port_impedance,
            "monopole": {"length_m": self.monopole.length, "radius_m": self.monopole.radius},
        }

    def canonical_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def content_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()[:16]


def _loss_to_dict(m: Material) -> dict:
    if isinstance(m.loss, mat.PerfectConductor):
        return {"kind": "pec"}
    if isinstance(m.loss, mat.Conductivity):
        return {"kind": "conductivity", "sigma_s_per_m": m.loss.sigma}
    return {"kind": "loss_tangent", "tan_delta": m.loss.tan_delta, "f_ref_hz": m.loss.f_ref}


def scenario_from_dict(d: dict) -> PackageScenario:
    stack = []
    for ld in d["stack"]:
        md = ld["material"]
        loss = md["loss"]
        if loss["kind"] == "pec":
            lm = mat.PerfectConductor()
        elif loss["kind"] == "conductivity":
            lm = mat.Conductivity(loss["sigma_s_per_m"])
        else:
            lm = mat.LossTangent(loss["tan_delta"], loss["f_ref_hz"])
        stack.append(
            Layer(Material(md["name"], md["eps_r"], lm), ld["thickness_m"], LayerRole(ld["role"]))
        )
    chips = tuple(
        ChipPlacement(
            tuple(cd["origin_xy_m"]),
            tuple(cd["size_xy_m"]),
            tuple(tuple(p) for p in cd["antennas_xy_m"]),
        )
        for cd in d["chips"]
    )
    return PackageScenario(
        name=d["name"],
        stack=tuple(stack),
        chips=chips,
        lateral_boundary=LateralBoundary(
            d["lateral_boundary"]["kind"], d["lateral_boundary"]["wall_offset_m"]
        ),
        package_size_xy=tuple(d["package_size_xy_m"]),
        band=Band(*d["band_hz"]),
        port_impedance=d["port_impedance_ohm"],
        monopole=MonopoleSpec(d["monopole"]["length_m"], d["monopole"]["radius_m"]),
    )


# ---------------------------------------------------------------------------
# Default stack (flip-chip, bottom to top) and presets
# ---------------------------------------------------------------------------

def build_default_stack(
    include_interposer: bool = False,
    silicon_thickness: float = 0.2e-3,
    spreader_thickness: float = 0.8e-3,
    interconnect_thickness: float | None = 13e-6,
    bump_thickness: float = 87.5e-6,
) -> tuple[Layer, ...]:
    """The seven-layer flip-chip stack with its tabulated defaults.

    Ordered bottom to top: 0.5 mm alumina carrier, optional 0.1 mm silicon
    interposer, 87.5 um bump sheet (solid conductor), 13 um SiO2
    interconnect, 0.2 mm bulk silicon, 0.8 mm AIN spreader, 0.5 mm aluminum
    heat sink.  Pass interconnect_thickness=None to omit the interconnect
    (used by the coarse desk-scale analogues, where a 13 um layer would
    dominate the stable time step while being electromagnetically inert).
    A spreader_thickness of 0 omits the spreader layer.
    """
    stack: list[Layer] = [Layer(mat.ALUMINA, 0.5e-3, LayerRole.CARRIER)]
    if include_interposer:
        stack.append(Layer(mat.SILICON_BULK, 0.1e-3, LayerRole.INTERPOSER))
    stack.append(Layer(mat.BUMP_METAL, bump_thickness, LayerRole.BUMP_SHEET))
    if interconnect_thickness is not None:
        stack.append(Layer(mat.SIO2, interconnect_thickness, LayerRole.INTERCONNECT))
    stack.append(Layer(mat.SILICON_BULK, silicon_thickness, LayerRole.SILICON_DIE))
    if spreader_thickness > 0:
        stack.append(Layer(mat.AIN, spreader_thickness, LayerRole.HEAT_SPREADER))
    stack.append(Layer(mat.ALUMINUM, 0.5e-3, LayerRole.HEAT_SINK))
    return tuple(stack)


def antenna_grid(chip_origin, chip_size, pattern: str) -> tuple[tuple[float, float], ...]:
    """Evenly distributed antenna positions on a chip footprint.

    "3x3" places a grid at the {1/4, 1/2, 3/4} fractions; "2x2" at the
    (+-1/4, +-1/4) quarter points; "1" a single antenna at an off-center
    (1/4, 1/4) point so multi-chip layouts still produce distinct pair
    distances.
    """
    x0, y0 = chip_origin
    sx, sy = chip_size
    if pattern == "3x3":
        fr = (0.25, 0.5, 0.75)
        return tuple((x0 + fx * sx, y0 + fy * sy) for fy in fr for fx in fr)
    if pattern == "2x2":
        fr = (0.25, 0.75)
        return tuple((x0 + fx * sx, y0 + fy * sy) for fy in fr for fx in fr)
    if pattern == "1":
        return ((x0 + 0.25 * sx, y0 + 0.25 * sy),)
    raise ValueError(f"unknown antenna pattern {pattern!r}")


PRESETS = ("single_chip_walled", "single_chip_open", "interposer_2x2", "mcm_2x2")

_DEFAULT_BAND = Band(50e9, 70e9, 60e9)


def default_monopole_length(band: Band, silicon_eps: float = 11.9) -> float:
    """Quarter wavelength at the band center in bulk silicon: the seed
    length before tuning."""
    return C0 / (4.0 * band.f_center * math.sqrt(silicon_eps))


def make_scenario(
    preset: str,
    *,
    band: Band | tuple[float, float, float] = _DEFAULT_BAND,
    silicon_thickness: float = 0.2e-3,
    spreader_thickness: float = 0.8e-3,
    interconnect_thickness: float | None = 13e-6,
    bump_thickness: float = 87.5e-6,
    chip_size: float | None = None,
    wall_offset: float | None = None,
    chip_separation: float | None = None,
    antennas_per_chip: str | None = None,
    monopole_length: float | None = None,
    monopole_radius: float = 10e-6,
    port_impedance: float = 50.0,
) -> PackageScenario:
    """Build one of the four package presets, with overrides.

    Presets: single_chip_walled (22 mm chip, walls 5 mm out),
    single_chip_open (same chip, absorbing lateral boundary),
    interposer_2x2 (four 10 mm chips on a 33 mm interposer package),
    mcm_2x2 (four 22 mm chips on a 59 mm package).
    """
    if preset not in PRESETS:
        raise ValueError(f"unknown preset {preset!r}; expected one of {PRESETS}")
    if not isinstance(band, Band):
        band = Band(*band)

    interposer = preset == "interposer_2x2"
    stack = build_default_stack(
        include_interposer=interposer,
        silicon_thickness=silicon_thickness,
        spreader_thickness=spreader_thickness,
        interconnect_thickness=interconnect_thickness,
        bump_thickness=bump_thickness,
    )

    if preset in ("single_chip_walled", "single_chip_open"):
        size = 22e-3 if chip_size is None else chip_size
        offset = 5e-3 if wall_offset is None else wall_offset
        pkg = size + 2 * offset
        pattern = antennas_per_chip or "3x3"
        chips = (
            ChipPlacement(
                (offset, offset), (size, size), antenna_grid((offset, offset), (size, size), pattern)
            ),
        )
        boundary = (
            LateralBoundary("pec_walls", offset)
            if preset == "single_chip_walled"
            else LateralBoundary("absorbing_open")
        )
        pkg_xy = (pkg, pkg)
    else:
        if preset == "interposer_2x2":
            size = 10e-3 if chip_size is None else chip_size
            sep = 5e-3 if chip_separation is None else chip_separation
            pkg = 33e-3
        else:  # mcm_2x2
            size = 22e-3 if chip_size is None else chip_size
            sep = 5e-3 if chip_separation is None else chip_separation
            pkg = 59e-3
        if chip_size is not None or chip_separation is not None:
            # scaled layouts keep the wall at one separation from the chips
            pkg = 2 * size + sep + 2 * (wall_offset if wall_offset is not None else sep)
        margin = (pkg - (2 * size + sep)) / 2
        if margin <= 0:
            raise ValueError("chips do not fit in the package with the given separation")
        pattern = antennas_per_chip or "2x2"
        origins = [
            (margin, margin),
            (margin + size + sep, margin),
            (margin, margin + size + sep),
            (margin + size + sep, margin + size + sep),
        ]
        chips = tuple(
            ChipPlacement(o, (size, size), antenna_grid(o, (size, size), pattern)) for o in origins
        )
        boundary = LateralBoundary("pec_walls", margin)
        pkg_xy = (pkg, pkg)

    if monopole_length is not None:
        length = monopole_length
    else:
        # seed length: quarter wave in silicon, clamped to the available
        # headroom (thin-silicon, no-spreader stacks have little of it)
        stack_probe = PackageScenario(
            name=preset, stack=stack, chips=(), lateral_boundary=LateralBoundary("absorbing_open"),
            package_size_xy=pkg_xy, band=band,
        )
        headroom = stack_probe.spreader_ceiling() - stack_probe.bump_sheet_top()
        length = min(default_monopole_length(band), 0.85 * headroom)
        # keep the slenderness invariant when the clamp makes the seed short
        monopole_radius = min(monopole_radius, length / 10)
    scenario = PackageScenario(
        name=preset,
        stack=stack,
        chips=chips,
        lateral_boundary=boundary,
        package_size_xy=pkg_xy,
        band=band,
        port_impedance=port_impedance,
        monopole=MonopoleSpec(length, monopole_radius),
    )
    violations = validate_scenario(scenario)
    if violations:
        raise ValueError("overrides violate scenario invariants: " + "; ".join(violations))
    return scenario


def with_monopole_length(s: PackageScenario, length: float) -> PackageScenario:
    return replace(s, monopole=replace(s.monopole, length=length))


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

def validate_scenario(s: PackageScenario) -> list[str]:
    """Check every scenario invariant; returns human-readable violations.

    Violations are data, not faults: an empty list means valid.
    """
    v: list[str] = []
    px, py = s.package_size_xy
    if px <= 0 or py <= 0:
        v.append(f"package size must be positive, got {px} x {py}")
    try:
        Band(s.band.f_min, s.band.f_max, s.band.f_center)
    except ValueError as e:
        v.append(str(e))
    if s.port_impedance <= 0:
        v.append("port impedance must be > 0")

    roles = [l.role for l in s.stack]
    if LayerRole.BUMP_SHEET not in roles:
        v.append("stack has no bump_sheet layer (monopoles need a ground plane)")

    for idx, chip in enumerate(s.chips):
        x0, y0 = chip.origin_xy
        sx, sy = chip.size_xy
        if sx <= 0 or sy <= 0:
            v.append(f"chip {idx}: size must be positive")
        if x0 < 0 or y0 < 0 or x0 + sx > px + 1e-12 or y0 + sy > py + 1e-12:
            v.append(f"chip {idx}: footprint exceeds the package ({sx*1e3:.3g} x {sy*1e3:.3g} mm)")
        for a, (ax, ay) in enumerate(chip.antenna_positions):
            if not chip.contains(ax, ay, strict=True):
                v.append(f"chip {idx}: antenna {a} is not strictly inside the chip footprint")
    for i in range(len(s.chips)):
        for j in range(i + 1, len(s.chips)):
            if s.chips[i].overlaps(s.chips[j]):
                v.append(f"chips {i} and {j} overlap")

    if LayerRole.BUMP_SHEET in roles:
        ground = s.bump_sheet_top()
        headroom_top = s.spreader_ceiling()
        stack_top = s.stack_height
        if s.monopole.length > stack_top - ground + 1e-15:
            v.append("monopole length exceeds the stack height above the bump sheet")
        elif s.monopole.length > headroom_top - ground + 1e-15:
            v.append("monopole does not fit under the heat-spreader ceiling")
        if s.monopole.radius > s.monopole.length / 10 + 1e-15:
            v.append("monopole radius must be <= length/10")
    return v
