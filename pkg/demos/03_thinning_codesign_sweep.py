"""Antenna-package co-design: how silicon thickness moves the channel.

Bulk silicon is lossy (sigma = 10 S/m), so every millimeter of die the
wave crosses costs dB.  Thinning the die pushes more of the propagation
into the low-loss spreader/lid region and lifts the worst-pair coupling
s_min — but every thickness needs its own monopole length, so the sweep
retunes at each point before judging it.

This runs a 5-point silicon sweep on the desk-scale walled package
through the sweep engine (the same path the `pkgwave sweep` command
uses): each point gets its own subdirectory with Touchstone + report,
manifest.json makes the sweep resumable if interrupted, and surface.csv
collects the (thickness, s_min, tuned length) table.

Runtime: roughly an hour on one core (5 points x (tune + 9 runs)).
Outputs land in demo_out/thinning_sweep/.
"""

from pathlib import Path

from pkgwave.sweep import SweepPlan, report_optimum, run_sweep

out_dir = Path("demo_out/thinning_sweep")

plan = SweepPlan(
    preset="single_chip_walled",
    axes=(("silicon_thickness", (0.1e-3, 0.25e-3, 0.4e-3, 0.55e-3, 0.7e-3)),),
    # desk-scale mapping, spelled out
    overrides={
        "chip_size": 8e-3,
        "wall_offset": 2e-3,
        "antennas_per_chip": "3x3",
        "interconnect_thickness": None,
        "bump_thickness": 0.15e-3,
    },
    retune=True,
    resolution=10,
)

print(f"sweeping {len(plan.points())} silicon thicknesses "
      "(each point: retune + full 9-port S-matrix) ...")
result = run_sweep(plan, out_dir)

print("\n  silicon   tuned length   s_min")
for rec in result.records:
    if rec.status != "done":
        print(f"  {rec.params['silicon_thickness'] * 1e3:5.2f} mm   FAILED: {rec.error}")
        continue
    print(f"  {rec.params['silicon_thickness'] * 1e3:5.2f} mm   "
          f"{rec.tuned_length_m * 1e6:7.0f} um   {rec.s_min_db:7.1f} dB")

# improvement of the best point over the thickest (worst-case) die
opt = report_optimum(result, baseline={"silicon_thickness": 0.7e-3})
print(f"\noptimum: silicon = {opt.params['silicon_thickness'] * 1e3:.2f} mm, "
      f"s_min = {opt.s_min_db:.1f} dB")
print(f"improvement over the 0.70 mm baseline: {opt.improvement_db:.1f} dB")
print(f"\nper-point artifacts + surface.csv are under {out_dir}/")
print("re-running this script skips completed points (manifest resume)")
