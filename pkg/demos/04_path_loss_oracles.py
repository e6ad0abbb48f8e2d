"""Check the solver against channels with known physics.

Two scenarios with textbook answers:

* four monopoles over a ground plane in open vacuum, 3 to 10
  wavelengths apart - power spreads spherically, so the fitted
  path-loss exponent must come out near n = 2;
* the same four monopoles squeezed between the ground plane and a metal
  lid 0.3 wavelengths above it - the wave is guided cylindrically and
  the exponent must drop well below 2.

The monopole length used for both comes from tuning a single antenna in
vacuum first, so the mismatch correction in the channel response has
little to do.

Runtime: ~10 minutes on one core (tuning + 2 x 4 excitations at 15
cells per wavelength).
"""

from pkgwave.constants import C0
from pkgwave.geometry import (
    Band,
    ChipPlacement,
    Layer,
    LayerRole,
    LateralBoundary,
    MonopoleSpec,
    PackageScenario,
)
from pkgwave.materials import ALUMINUM, BUMP_METAL, VACUUM
from pkgwave.pipeline import simulate_scenario
from pkgwave.ports import tune_monopole

band = Band(50e9, 70e9, 60e9)
lam = C0 / band.f_center


def ground_plane_line(name, gap_height, monopole_length, top_plate):
    """Four monopoles in a line over a ground sheet; open on the sides."""
    margin = 2 * lam
    xs = [margin, margin + 3 * lam, margin + 7 * lam, margin + 10 * lam]
    px, py = 2 * margin + 10 * lam, 2 * margin
    stack = [
        Layer(BUMP_METAL, 0.6e-3, LayerRole.BUMP_SHEET),
        Layer(VACUUM, gap_height, LayerRole.VACUUM_GAP),
    ]
    if top_plate:
        stack.append(Layer(ALUMINUM, 0.3e-3, LayerRole.HEAT_SINK))
    antennas = tuple((x, py / 2) for x in xs)
    return PackageScenario(
        name=name,
        stack=tuple(stack),
        chips=(ChipPlacement((0.0, 0.0), (px, py), antennas),),
        lateral_boundary=LateralBoundary("absorbing_open"),
        package_size_xy=(px, py),
        band=band,
        monopole=MonopoleSpec(length=monopole_length),
    )


print("tuning one monopole in open vacuum ...")
tune_scenario = ground_plane_line("tune", 0.6 * lam, 0.24 * lam, top_plate=False)
# a single antenna is enough for tuning: reuse the line scenario's stack
tuned = tune_monopole(
    PackageScenario(
        name="vacuum_monopole",
        stack=tune_scenario.stack,
        chips=(ChipPlacement((0.0, 0.0), (1.6 * lam, 1.6 * lam),
                             ((0.8 * lam, 0.8 * lam),)),),
        lateral_boundary=LateralBoundary("absorbing_open"),
        package_size_xy=(1.6 * lam, 1.6 * lam),
        band=band,
    ),
    resolution=45,
)
print(f"  tuned height: {tuned.length / lam:.3f} lambda "
      f"({tuned.s11_db:.1f} dB return loss)")

print("\nfree space: four monopoles, separations 3/4/7/10 lambda ...")
free = simulate_scenario(
    ground_plane_line("free_space_line", 1.5 * lam, tuned.length, top_plate=False),
    resolution=15,
)
print(f"  fitted exponent n = {free.report.fit.n:.2f}  (expected ~2.0)")

print("\nparallel plate: same line under a lid 0.3 lambda up ...")
guided = simulate_scenario(
    ground_plane_line("parallel_plate_line", 0.3 * lam, tuned.length, top_plate=True),
    resolution=15,
)
print(f"  fitted exponent n = {guided.report.fit.n:.2f}  (expected well below 2)")

print("\nspherical spreading in the open, cylindrical guiding under the lid:")
print("the package cavity behaves like the second case, which is why")
print("in-package exponents sit below free space.")
