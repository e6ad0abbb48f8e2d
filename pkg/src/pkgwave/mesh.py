"""Rectilinear Yee grid generation from a package scenario.

Lateral axes are uniform; the vertical axis is graded so every layer spans
at least two whole cells and adjacent cell heights never differ by more
than 1.5x.  All cell edges obey the ten-cells-per-wavelength bound at the
top of the band in the densest dielectric, and the time step satisfies the
3D stability bound with a 0.99 safety factor.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .constants import C0
from .geometry import CHIP_ROLES, PackageScenario

CFL_SAFETY = 0.99
GRADING_RATIO = 1.5


class MeshError(ValueError):
    pass


@dataclass(frozen=True)
class MaterialTable:
    """Per-index cell material properties, conductivity folded to f_center."""
    names: tuple[str, ...]
    eps_r: np.ndarray   # float64 (n,)
    sigma: np.ndarray   # float64 (n,), S/m
    is_pec: np.ndarray  # bool (n,)


@dataclass(frozen=True)
class YeeGrid:
    edges_x: np.ndarray  # (nx+1,) m, monotone
    edges_y: np.ndarray
    edges_z: np.ndarray
    material_index: np.ndarray  # (nx, ny, nz) int16, cell centers
    materials: MaterialTable
    dt: float
    cells_per_wavelength: float
    lambda_min: float
    snap_error: float  # worst chip/antenna snap distance, m

    @property
    def shape(self) -> tuple[int, int, int]:
        return (len(self.edges_x) - 1, len(self.edges_y) - 1, len(self.edges_z) - 1)

    @property
    def cell_count(self) -> int:
        nx, ny, nz = self.shape
        return nx * ny * nz

    def spacings(self, axis: int) -> np.ndarray:
        return np.diff((self.edges_x, self.edges_y, self.edges_z)[axis])

    def nearest_node(self, axis: int, coord: float) -> int:
        edges = (self.edges_x, self.edges_y, self.edges_z)[axis]
        return int(np.argmin(np.abs(edges - coord)))


def _graded_sizes(thickness: float, h_max: float) -> list[float]:
    n = max(2, math.ceil(thickness / h_max - 1e-12))
    return [thickness / n] * n


def _split_geometric(h: float, h_start: float, ratio: float = 1.4) -> list[float]:
    """Split one cell of height h into a ramp away from a neighbor of size
    h_start.  The ramp's small end never drops below 0.7*h_start, so the
    split cannot create a deeper local minimum (which would make the
    grading sweep refine without bound)."""
    if h <= h_start * ratio:
        return [h]
    a = ratio * h_start  # first (smallest) ramp cell

    def total(q: float, m: int) -> float:
        return a * m if abs(q - 1.0) < 1e-12 else a * (q**m - 1.0) / (q - 1.0)

    m = 2
    while total(ratio, m) < h:
        m += 1
    if a * m > h:
        # a geometric ramp of m cells would overshoot: fill uniformly
        # (each cell is in (a/2, a], still within the ratio cap of h_start)
        n = max(2, math.ceil(h / a))
        return [h / n] * n
    # total(1, m) <= h <= total(ratio, m): solve for the growth factor
    lo, hi = 1.0, ratio
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if total(mid, m) < h:
            lo = mid
        else:
            hi = mid
    q = 0.5 * (lo + hi)
    sizes = [a * q**i for i in range(m)]
    scale = h / sum(sizes)  # exact layer fill
    return [s * scale for s in sizes]


def _smooth_vertical(sizes: list[float], layer_of: list[int]) -> tuple[list[float], list[int]]:
    """Enforce the adjacent-cell grading cap by splitting coarse cells into
    geometric ramps.  Exact layer fill is preserved: splits never cross a
    cell boundary."""
    changed = True
    guard = 0
    while changed:
        changed = False
        guard += 1
        if guard > 200:
            raise MeshError("vertical grading did not converge")
        i = 0
        while i < len(sizes) - 1:
            a, b = sizes[i], sizes[i + 1]
            if b > GRADING_RATIO * a:
                ramp = _split_geometric(b, a)
                sizes[i + 1 : i + 2] = ramp
                layer_of[i + 1 : i + 2] = [layer_of[i + 1]] * len(ramp)
                changed = True
            elif a > GRADING_RATIO * b:
                ramp = _split_geometric(a, b)[::-1]
                sizes[i : i + 1] = ramp
                layer_of[i : i + 1] = [layer_of[i]] * len(ramp)
                changed = True
            i += 1
    return sizes, layer_of


def generate_mesh(
    scenario: PackageScenario,
    resolution: float = 10.0,
    max_cells: int | None = None,
) -> YeeGrid:
    """Mesh a validated scenario at `resolution` cells per wavelength.

    The wavelength is taken at the top of the band in the densest
    dielectric, so the bound is uniform across the whole domain.
    """
    if resolution < 10:
        raise MeshError(f"resolution must be >= 10 cells per wavelength, got {resolution}")
    for layer in scenario.stack:
        if layer.thickness < 1e-9:
            raise MeshError(f"layer {layer.role.value} thinner than 1 nm")

    lam_min = C0 / (scenario.band.f_max * math.sqrt(scenario.max_permittivity()))
    h_max = lam_min / resolution

    # lateral: uniform
    px, py = scenario.package_size_xy
    nx = max(2, math.ceil(px / h_max - 1e-12))
    ny = max(2, math.ceil(py / h_max - 1e-12))
    edges_x = np.linspace(0.0, px, nx + 1)
    edges_y = np.linspace(0.0, py, ny + 1)

    # vertical: per-layer uniform, then grading-cap smoothing
    sizes: list[float] = []
    layer_of: list[int] = []
    for li, layer in enumerate(scenario.stack):
        s = _graded_sizes(layer.thickness, h_max)
        sizes.extend(s)
        layer_of.extend([li] * len(s))
    sizes, layer_of = _smooth_vertical(sizes, layer_of)
    edges_z = np.concatenate([[0.0], np.cumsum(sizes)])
    edges_z[-1] = scenario.stack_height  # exact top despite float accumulation

    if max_cells is not None and nx * ny * len(sizes) > max_cells:
        raise MeshError(
            f"grid of {nx * ny * len(sizes)} cells exceeds the budget of {max_cells}"
        )

    # material table: one entry per distinct layer material, plus vacuum 0
    names = ["vacuum"]
    eps = [1.0]
    sig = [0.0]
    pec = [False]
    layer_mat_idx = []
    fc = scenario.band.f_center
    for layer in scenario.stack:
        m = layer.material
        if m.is_pec:
            key = (m.name, None, None)
        else:
            key = (m.name, m.rel_permittivity, m.conductivity_at(fc))
        found = None
        for i, nm in enumerate(names):
            if nm == key[0] and (pec[i] == (key[1] is None)) and (
                key[1] is None or (eps[i] == key[1] and sig[i] == key[2])
            ):
                found = i
                break
        if found is None:
            names.append(m.name)
            if m.is_pec:
                eps.append(1.0)
                sig.append(0.0)
                pec.append(True)
            else:
                eps.append(m.rel_permittivity)
                sig.append(m.conductivity_at(fc))
                pec.append(False)
            found = len(names) - 1
        layer_mat_idx.append(found)

    table = MaterialTable(
        tuple(names), np.array(eps), np.array(sig), np.array(pec, dtype=bool)
    )

    # cell-center material assignment
    cz = 0.5 * (edges_z[:-1] + edges_z[1:])
    cx = 0.5 * (edges_x[:-1] + edges_x[1:])
    cy = 0.5 * (edges_y[:-1] + edges_y[1:])
    mat_idx = np.zeros((nx, ny, len(sizes)), dtype=np.int16)

    # chip-footprint mask on cell centers
    chip_mask = np.zeros((nx, ny), dtype=bool)
    snap_err = 0.0
    for chip in scenario.chips:
        x0, y0 = chip.origin_xy
        x1, y1 = x0 + chip.size_xy[0], y0 + chip.size_xy[1]
        i0, i1 = _snap(edges_x, x0), _snap(edges_x, x1)
        j0, j1 = _snap(edges_y, y0), _snap(edges_y, y1)
        snap_err = max(
            snap_err,
            abs(edges_x[i0] - x0), abs(edges_x[i1] - x1),
            abs(edges_y[j0] - y0), abs(edges_y[j1] - y1),
        )
        chip_mask[i0:i1, j0:j1] = True
        for ax, ay in chip.antenna_positions:
            ia, ja = _snap(edges_x, ax), _snap(edges_y, ay)
            snap_err = max(snap_err, abs(edges_x[ia] - ax), abs(edges_y[ja] - ay))

    for k, zc in enumerate(cz):
        li = layer_of[k]
        layer = scenario.stack[li]
        mi = layer_mat_idx[li]
        if layer.role in CHIP_ROLES:
            plane = np.where(chip_mask, np.int16(mi), np.int16(0))
            mat_idx[:, :, k] = plane
        else:
            mat_idx[:, :, k] = mi

    dx_min = float(np.min(np.diff(edges_x)))
    dy_min = float(np.min(np.diff(edges_y)))
    dz_min = float(min(sizes))
    dt = CFL_SAFETY / (C0 * math.sqrt(1 / dx_min**2 + 1 / dy_min**2 + 1 / dz_min**2))

    grid = YeeGrid(
        edges_x=edges_x,
        edges_y=edges_y,
        edges_z=edges_z,
        material_index=mat_idx,
        materials=table,
        dt=dt,
        cells_per_wavelength=resolution,
        lambda_min=lam_min,
        snap_error=snap_err,
    )
    half_cell = 0.5 * max(dx_min, dy_min)
    if snap_err >= half_cell * (1 + 1e-9):
        raise MeshError(f"snap error {snap_err:.3e} m is not below half a cell")
    return grid


def _snap(edges: np.ndarray, coord: float) -> int:
    return int(np.argmin(np.abs(edges - coord)))


def estimate_cost(
    grid: YeeGrid,
    run_time: float,
    pml_pad: tuple[int, int, int, int, int, int] = (0, 0, 0, 0, 0, 0),
) -> dict:
    """Deterministic cost model for a run of `run_time` simulated seconds.

    The memory figure models what the solver actually allocates per cell:
    six float32 field components, six float32 update-coefficient pairs,
    twelve float32 absorbing-boundary convolution accumulators, and an
    int16 material index.  `pml_pad` accounts for grid extension on
    absorbing faces.
    """
    nx, ny, nz = grid.shape
    nx += pml_pad[0] + pml_pad[1]
    ny += pml_pad[2] + pml_pad[3]
    nz += pml_pad[4] + pml_pad[5]
    cells = nx * ny * nz
    steps = math.ceil(run_time / grid.dt)
    bytes_per_cell = (6 + 12 + 12) * 4 + 2
    return {
        "cell_count": cells,
        "step_count": steps,
        "memory_bytes": cells * bytes_per_cell,
        "flop_estimate": cells * steps * 36,
    }


def write_mesh_dump(grid: YeeGrid, out_dir: str | Path) -> None:
    """CSV of cell edges per axis plus a little-endian int16 material volume.

    The volume file starts with three little-endian uint32 (nx, ny, nz)
    followed by nx*ny*nz int16 material indices in C order.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, edges in (("edges_x", grid.edges_x), ("edges_y", grid.edges_y), ("edges_z", grid.edges_z)):
        with open(out / f"{name}.csv", "w") as f:
            f.write("index,coordinate_m\n")
            for i, e in enumerate(edges):
                f.write(f"{i},{float(e)!r}\n")
    nx, ny, nz = grid.shape
    with open(out / "materials.bin", "wb") as f:
        f.write(struct.pack("<III", nx, ny, nz))
        f.write(np.ascontiguousarray(grid.material_index, dtype="<i2").tobytes())
    with open(out / "materials.csv", "w") as f:
        f.write("index,name,eps_r,sigma_s_per_m,is_pec\n")
        for i, name in enumerate(grid.materials.names):
            f.write(
                f"{i},{name},{float(grid.materials.eps_r[i])!r},"
                f"{float(grid.materials.sigma[i])!r},{int(grid.materials.is_pec[i])}\n"
            )


def mesh_summary(grid: YeeGrid) -> dict:
    nx, ny, nz = grid.shape
    return {
        "shape": [nx, ny, nz],
        "cell_count": grid.cell_count,
        "dt_s": grid.dt,
        "cells_per_wavelength": grid.cells_per_wavelength,
        "lambda_min_m": grid.lambda_min,
        "min_edge_m": float(
            min(np.min(np.diff(grid.edges_x)), np.min(np.diff(grid.edges_y)), np.min(np.diff(grid.edges_z)))
        ),
        "max_edge_m": float(
            max(np.max(np.diff(grid.edges_x)), np.max(np.diff(grid.edges_y)), np.max(np.diff(grid.edges_z)))
        ),
        "snap_error_m": grid.snap_error,
    }
