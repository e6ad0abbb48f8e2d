"""Tune a monopole over a ground plane in vacuum.

The textbook result: a thin quarter-wave monopole over a large ground
plane resonates slightly short of lambda/4 (about 0.24 lambda once the
finite wire thickness is accounted for) and presents ~36 ohm at the
feed, a comfortable match to a 50 ohm port.  This script builds that
scenario from scratch, lets the golden-section tuner find the length
that minimizes |S11| at 60 GHz, and prints the search trace.

Runtime: a few minutes on one core (each trial length is a full FDTD
run on a ~1 M cell vacuum mesh at 45 cells per wavelength).
"""

import numpy as np

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
from pkgwave.materials import BUMP_METAL, VACUUM
from pkgwave.ports import tune_monopole

band = Band(50e9, 70e9, 60e9)
lam = C0 / band.f_center  # ~5 mm at 60 GHz

# A 1.6-lambda square ground sheet under 0.6 lambda of open vacuum.  The
# vacuum gap doubles as the tuner's search ceiling, so keeping it at
# 0.6 lambda confines the search to the quarter-wave branch (a taller
# gap would let the search wander off to the better-matched 3/4-wave
# resonance).
side = 1.6 * lam
scenario = PackageScenario(
    name="vacuum_monopole",
    stack=(
        Layer(BUMP_METAL, 0.6e-3, LayerRole.BUMP_SHEET),
        Layer(VACUUM, 0.6 * lam, LayerRole.VACUUM_GAP),
    ),
    chips=(ChipPlacement((0.0, 0.0), (side, side), ((side / 2, side / 2),)),),
    lateral_boundary=LateralBoundary("absorbing_open"),
    package_size_xy=(side, side),
    band=band,
    monopole=MonopoleSpec(length=0.24 * lam),
)

print(f"wavelength at band center: {lam * 1e3:.3f} mm")
print("searching for the length that minimizes |S11(60 GHz)| ...")
result = tune_monopole(scenario, resolution=45)

print("\n  trial length        |S11| at 60 GHz")
for length, s11 in result.evaluations:
    marker = "  <- best" if length == result.length else ""
    print(f"  {length * 1e3:7.3f} mm ({length / lam:.3f} lambda)  {s11:7.2f} dB{marker}")

print(f"\ntuned length : {result.length * 1e3:.3f} mm = {result.length / lam:.3f} lambda")
print(f"return loss  : {result.s11_db:.1f} dB after {result.iterations} bracket steps")
print("\nThe tuned height lands near 0.24 lambda: the quarter-wave resonance,")
print("shortened a little by the finite thickness of the discrete wire.")

# Sanity: the tuned scenario carries the new length and nothing else changed.
assert np.isclose(result.scenario.monopole.length, result.length)
assert result.scenario.stack == scenario.stack
