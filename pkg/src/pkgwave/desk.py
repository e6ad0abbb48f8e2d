"""Desk-scale analogues of the full-scale package presets.

The full-scale presets (22 mm chips, 3x3 antennas per chip, 16-port
multi-chip modules) need commercial-solver-class compute.  The desk
scale keeps the same vertical stack physics and boundary conditions but
shrinks the lateral extents and port counts so a complete S-matrix runs
in minutes on one core:

  - chips shrink to 8 mm (single-chip and MCM) / 4 mm (interposer)
    footprints with 2 mm chip separations.  The chip-size:separation
    ratio is what separates the multi-chip topologies physically — MCM
    paths are dominated by lossy bulk silicon (big chips, small gaps)
    while interposer paths cross proportionally more of the lossless
    inter-chip gap — so the desk mapping preserves those ratios (4:1
    MCM, 2:1 interposer) rather than the absolute dimensions;
  - single-chip scenarios keep a 3x3 antenna grid and multi-chip
    scenarios a 2x2 grid per chip (16 ports): the path-loss regression
    needs a spread of pair distances, and with a single antenna per
    chip a 2x2 chip grid yields only two distinct distances, which lets
    one cavity mode dictate the fitted slope;
  - the 13 um interconnect layer is dropped and the solid-PEC bump sheet
    is thickened to 150 um.  Both changes only move the PEC ground plane
    by tens of microns: the interconnect sits entirely below that plane's
    cavity ceiling's field region, and a PEC sheet's thickness does not
    affect the fields above it.  This lifts the vertical cell floor from
    6.5 um to 75 um and the stable time step by an order of magnitude;
  - the mesh runs at 10 cells per wavelength instead of 15+.

Absolute dB values therefore differ from the full-scale presets; signs,
orderings, and trends are preserved and that is what the desk scale is
used to assert.
"""

from __future__ import annotations

from .geometry import PackageScenario, make_scenario

DESK_RESOLUTION = 10

# shared stack simplifications (see module docstring)
_STACK = {
    "interconnect_thickness": None,
    "bump_thickness": 0.15e-3,
}

DESK_OVERRIDES: dict[str, dict] = {
    "single_chip_walled": {
        **_STACK,
        "chip_size": 8e-3,
        "wall_offset": 2e-3,
        "antennas_per_chip": "3x3",
    },
    "single_chip_open": {
        **_STACK,
        "chip_size": 8e-3,
        "wall_offset": 2e-3,
        "antennas_per_chip": "3x3",
    },
    "interposer_2x2": {
        **_STACK,
        "chip_size": 4e-3,
        "chip_separation": 2e-3,
        "antennas_per_chip": "2x2",
    },
    "mcm_2x2": {
        **_STACK,
        "chip_size": 8e-3,
        "chip_separation": 2e-3,
        "antennas_per_chip": "2x2",
    },
}


def desk_scenario(preset: str, **extra) -> PackageScenario:
    """Desk-scale analogue of a full-scale preset, with overrides."""
    if preset not in DESK_OVERRIDES:
        raise ValueError(f"no desk-scale mapping for preset {preset!r}")
    kwargs = dict(DESK_OVERRIDES[preset])
    kwargs.update(extra)
    return make_scenario(preset, **kwargs)
