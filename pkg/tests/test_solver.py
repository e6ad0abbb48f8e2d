"""Time-domain solver physics: conservation, passivity, linearity,
symmetry, absorbing boundaries, and the run loop."""

import math

import numpy as np
import pytest

from pkgwave.constants import C0
from pkgwave.geometry import (
    Band,
    LateralBoundary,
    PackageScenario,
    make_scenario,
)
from pkgwave.mesh import CFL_SAFETY, MaterialTable, YeeGrid, generate_mesh
from pkgwave.solver import (
    PmlConfig,
    RunPolicy,
    Simulation,
    SolverError,
    SourceWaveform,
    record_field_slice,
)

BAND = Band(50e9, 70e9, 60e9)
ALL_PEC = {f: "pec" for f in ("x-", "x+", "y-", "y+", "z-", "z+")}
ALL_PML = {f: "pml" for f in ("x-", "x+", "y-", "y+", "z-", "z+")}


def make_box(n: int = 16, cell: float = 0.5e-3, sigma: float = 0.0):
    """Uniform n^3 single-material box with no chips or ports."""
    edges = np.arange(n + 1) * cell
    table = MaterialTable(
        names=("fill",),
        eps_r=np.array([1.0]),
        sigma=np.array([sigma]),
        is_pec=np.array([False]),
    )
    dt = CFL_SAFETY / (C0 * math.sqrt(3.0 / cell**2))
    grid = YeeGrid(
        edges_x=edges,
        edges_y=edges,
        edges_z=edges,
        material_index=np.zeros((n, n, n), dtype=np.int16),
        materials=table,
        dt=dt,
        cells_per_wavelength=10.0,
        lambda_min=10 * cell,
        snap_error=0.0,
    )
    scen = PackageScenario(
        name="box",
        stack=(),
        chips=(),
        lateral_boundary=LateralBoundary("pec_walls"),
        package_size_xy=(n * cell, n * cell),
        band=BAND,
    )
    return grid, scen


def seed_cavity_mode(sim: Simulation) -> None:
    """Lowest TM cavity mode (Ez ~ sin sin, uniform in z): a smooth field
    whose discrete evolution is a pure oscillation."""
    nx, ny, nz = sim.nx, sim.ny, sim.nz
    x = np.arange(nx + 1) / nx
    y = np.arange(ny + 1) / ny
    sim.state.Ez[...] = (
        np.sin(np.pi * x)[:, None, None] * np.sin(np.pi * y)[None, :, None]
    ).astype(np.float32) * np.ones((1, 1, nz), dtype=np.float32)


class TestWaveform:
    def test_band_coverage_and_dc_rejection(self):
        w = SourceWaveform(60e9, 20e9)
        w.validate()
        assert w.spectrum_envelope(50e9) >= 0.10
        assert w.spectrum_envelope(70e9) >= 0.10
        assert w.spectrum_envelope(0.0) <= 1e-6
        assert w.spectrum_envelope(60e9) == pytest.approx(1.0, abs=1e-6)

    def test_rejects_band_touching_dc(self):
        with pytest.raises(ValueError, match="DC"):
            SourceWaveform(5e9, 10e9).validate()

    def test_rejects_leaky_dc_tail(self):
        # wide fractional bandwidth: short pulse with energy at DC
        with pytest.raises(ValueError, match="DC"):
            SourceWaveform(10e9, 18e9).validate()

    def test_causal_start(self):
        w = SourceWaveform(60e9, 20e9)
        assert abs(w(0.0)) < 1e-8 * w.amplitude
        assert w.end_time > w.t0 > 0


class TestConfigGuards:
    def test_pml_minimum_thickness(self):
        with pytest.raises(ValueError):
            PmlConfig(thickness_cells=4)

    def test_pml_reflection_target(self):
        with pytest.raises(ValueError):
            PmlConfig(target_reflection_db=-20.0)

    def test_policy_window(self):
        p = RunPolicy(window_periods=20.0)
        dt = 1e-12
        assert p.window_steps(60e9, dt) == round(20.0 / (60e9 * dt))

    def test_excited_port_out_of_range(self):
        s = make_scenario(
            "single_chip_walled", chip_size=2e-3, wall_offset=1e-3, antennas_per_chip="1"
        )
        g = generate_mesh(s, resolution=10)
        with pytest.raises(SolverError, match="out of range"):
            Simulation(g, s, excited_port=5)


class TestEnergyConservation:
    def test_lossless_cavity_energy_conserved(self):
        """The instantaneous energy sum carries an O(omega*dt) ripple from
        the E/H half-step stagger; its ripple-period average is the
        conserved quantity and must not drift."""
        grid, scen = make_box()
        sim = Simulation(grid, scen, face_types=ALL_PEC)
        seed_cavity_mode(sim)
        assert sim.total_energy() > 0

        def windowed(n=256):
            acc = 0.0
            for _ in range(n):
                sim.step(1)
                acc += sim.total_energy()
            return acc / n

        w0 = windowed()
        sim.step(4000)
        assert abs(windowed() / w0 - 1.0) < 1e-3

    def test_instantaneous_energy_bounded(self):
        grid, scen = make_box()
        sim = Simulation(grid, scen, face_types=ALL_PEC)
        seed_cavity_mode(sim)
        e0 = sim.total_energy()
        vals = []
        for _ in range(20):
            sim.step(97)  # co-prime with the ripple period: samples the band
            vals.append(sim.total_energy() / e0)
        assert 0.8 < min(vals) and max(vals) < 1.2

    def test_lossy_medium_is_passive(self):
        grid, scen = make_box(sigma=10.0)
        sim = Simulation(grid, scen, face_types=ALL_PEC)
        seed_cavity_mode(sim)
        energies = [sim.total_energy()]
        for _ in range(10):
            sim.step(100)
            energies.append(sim.total_energy())
        diffs = np.diff(energies)
        assert np.all(diffs < 0), "energy must decrease monotonically in a lossy box"
        assert energies[-1] < 0.9 * energies[0]

    def test_zero_fields_zero_energy(self):
        grid, scen = make_box(n=8)
        sim = Simulation(grid, scen, face_types=ALL_PEC)
        assert sim.total_energy() == 0.0


class TestLinearity:
    def test_scaling_is_exact(self):
        """Doubling the initial field doubles every sample bit-for-bit:
        the update is linear and x2 is exact in binary floating point."""
        grid, scen = make_box(n=12)
        a = Simulation(grid, scen, face_types=ALL_PEC)
        b = Simulation(grid, scen, face_types=ALL_PEC)
        a.set_initial_fields(seed=3, amplitude=1.0)
        b.set_initial_fields(seed=3, amplitude=2.0)
        a.step(300)
        b.step(300)
        for comp in ("Ex", "Ey", "Ez", "Hx", "Hy", "Hz"):
            fa = getattr(a.state, comp)
            fb = getattr(b.state, comp)
            assert np.array_equal(2.0 * fa, fb), comp


class TestMirrorSymmetry:
    def test_x_mirror_preserved(self):
        """A field symmetric under x-reflection stays exactly symmetric:
        mirrored lattice sites execute identical arithmetic."""
        grid, scen = make_box(n=12)
        sim = Simulation(grid, scen, face_types=ALL_PEC)
        rng = np.random.default_rng(11)
        st = sim.state
        for comp, odd in (("Ex", True), ("Ey", False), ("Ez", False)):
            arr = getattr(st, comp)
            r = rng.standard_normal(arr.shape).astype(np.float32)
            sym = (r - r[::-1]) if odd else (r + r[::-1])
            cb = sim._cb[("Ex", "Ey", "Ez").index(comp)]
            sym[cb == 0] = 0.0
            arr[...] = sym
        sim.step(200)
        assert np.array_equal(st.Ez, st.Ez[::-1])
        assert np.array_equal(st.Ey, st.Ey[::-1])
        assert np.array_equal(st.Ex, -st.Ex[::-1])


class TestAbsorbingBoundary:
    def test_radiated_pulse_absorbed(self):
        """A pulse radiated in free space leaves <= -40 dB of its peak
        energy behind once the source is quiet and the wave has crossed."""
        grid, scen = make_box(n=24, cell=0.4e-3)
        sim = Simulation(grid, scen, face_types=ALL_PML)
        wf = sim.waveform
        c = (sim.nx // 2 + 1, sim.ny // 2 + 1, sim.nz // 2)
        peak = 0.0
        n_steps = int((wf.end_time + 3 * sim._domain_crossing_time()) / sim.dt)
        for _ in range(n_steps):
            sim.state.Ez[c] += np.float32(wf(sim.state.time))
            sim.step(1)
            peak = max(peak, sim.total_energy())
        residual = sim.total_energy() / peak
        assert residual < 1e-4, f"absorbing boundary left {residual:.2e} of peak energy"

    def test_pec_box_traps_the_same_pulse(self):
        grid, scen = make_box(n=24, cell=0.4e-3)
        sim = Simulation(grid, scen, face_types=ALL_PEC)
        wf = sim.waveform
        c = (sim.nx // 2 + 1, sim.ny // 2 + 1, sim.nz // 2)
        peak = 0.0
        n_steps = int((wf.end_time + 3 * sim._domain_crossing_time()) / sim.dt)
        for _ in range(n_steps):
            sim.state.Ez[c] += np.float32(wf(sim.state.time))
            sim.step(1)
            peak = max(peak, sim.total_energy())
        assert sim.total_energy() > 0.3 * peak


class TestInitialFields:
    def test_pec_edges_stay_zero(self):
        grid, scen = make_box(n=10)
        sim = Simulation(grid, scen, face_types=ALL_PEC)
        sim.set_initial_fields(seed=1)
        st = sim.state
        # tangential E on every face is PEC and must be exactly zero
        assert st.Ez[1:-1, 1:-1].any()  # interior is populated
        assert not st.Ez[0].any() and not st.Ez[-1].any()
        assert not st.Ez[:, 0].any() and not st.Ez[:, -1].any()
        assert not st.Ex[:, 0, :].any() and not st.Ex[:, :, 0].any()

    def test_deterministic_seed(self):
        grid, scen = make_box(n=10)
        a = Simulation(grid, scen, face_types=ALL_PEC)
        b = Simulation(grid, scen, face_types=ALL_PEC)
        a.set_initial_fields(seed=7)
        b.set_initial_fields(seed=7)
        assert np.array_equal(a.state.Ez, b.state.Ez)


@pytest.fixture(scope="module")
def tiny():
    s = make_scenario(
        "single_chip_walled", chip_size=2e-3, wall_offset=1e-3, antennas_per_chip="1"
    )
    g = generate_mesh(s, resolution=10)
    return s, g


class TestRunLoop:
    def test_port_records_and_faces(self, tiny):
        s, g = tiny
        sim = Simulation(g, s, excited_port=0)
        assert sim.face_types == {
            "x-": "pec", "x+": "pec", "y-": "pec", "y+": "pec", "z-": "pec", "z+": "pec"
        }
        res = sim.run(RunPolicy(max_steps=4000))
        assert len(res.ports) == 1
        rec = res.ports[0]
        assert rec.excited
        assert len(rec.v) == res.steps == len(rec.i)
        assert np.isfinite(rec.v).all() and np.isfinite(rec.i).all()
        assert np.max(np.abs(rec.v)) > 0
        assert rec.dt == g.dt and rec.v_t0 == g.dt and rec.i_t0 == 1.5 * g.dt

    def test_probes_recorded(self, tiny):
        s, g = tiny
        sim = Simulation(g, s, excited_port=0)
        i, j, k = sim.ports[0].ijk
        sim.add_probe("feed_gap", "Ez", (i, j, k))
        with pytest.raises(ValueError):
            sim.add_probe("bad", "Et", (i, j, k))
        res = sim.run(RunPolicy(max_steps=500))
        tr = res.probes["feed_gap"]
        assert len(tr) == res.steps
        assert np.max(np.abs(tr)) > 0

    def test_open_scenario_pads_lateral_pml(self):
        s = make_scenario(
            "single_chip_open", chip_size=2e-3, wall_offset=1e-3, antennas_per_chip="1"
        )
        g = generate_mesh(s, resolution=10)
        sim = Simulation(g, s, excited_port=0)
        assert sim.face_types["x-"] == "pml" and sim.face_types["y+"] == "pml"
        assert sim.face_types["z+"] == "pec"  # heat sink on top, not open air
        assert sim.nx == g.shape[0] + 2 * sim.pml.thickness_cells

    def test_settings_summary(self, tiny):
        s, g = tiny
        sim = Simulation(g, s, excited_port=0)
        cfg = sim.settings_summary()
        assert cfg["dt_s"] == g.dt
        assert cfg["excited_port"] == 0
        assert cfg["source_f_center_hz"] == s.band.f_center


class TestFieldSlices:
    def test_slice_shapes_and_bounds(self):
        grid, scen = make_box(n=10)
        sim = Simulation(grid, scen, face_types=ALL_PEC)
        sim.set_initial_fields(seed=2)
        mid = 0.5 * (sim.edges_z[0] + sim.edges_z[-1])
        mag = record_field_slice(sim, 2, mid)
        assert mag.shape == (10, 10)
        assert np.all(mag >= 0) and np.max(mag) > 0
        with pytest.raises(ValueError, match="outside"):
            sim.field_magnitude_slice(0, 1.0)
