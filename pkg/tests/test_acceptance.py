"""End-to-end acceptance suite.

Ten gates, from pure post-processing arithmetic (closed-form oracles,
sub-second) through solver invariants to the physics conclusions the
package exists to reproduce at desk scale: thinner silicon opens the
channel, a heat spreader closes it, removing the package walls costs
nearly an order of magnitude, multi-chip topologies decay faster than
free space while an optimized single-chip cavity decays slower, and the
channel does not deteriorate from 60 to 100 GHz.

Everything except TestPostProcessing runs real FDTD and is marked slow.
Desk-scale runs are cached per scenario so criteria that share a
configuration (e.g. the default walled package) pay for it once.
"""

import math
import time

import numpy as np
import pytest

from pkgwave.channel import channel_response, fit_path_loss
from pkgwave.cli import EXIT_OK, main
from pkgwave.constants import C0
from pkgwave.desk import DESK_RESOLUTION, desk_scenario
from pkgwave.geometry import Band
from pkgwave.pipeline import simulate_scenario
from pkgwave.ports import SParameterSet, tune_monopole
from pkgwave.solver import RunPolicy, Simulation
from pkgwave.touchstone import write_touchstone

from test_solver import ALL_PEC, ALL_PML, make_box, seed_cavity_mode
from _oracles import (
    LAMBDA0,
    free_space_scenario,
    parallel_plate_scenario,
    vacuum_tuning_scenario,
)

slow = pytest.mark.slow


# --------------------------------------------------------------------------
# 1. Post-processing exactness (closed-form oracles, sub-second)
# --------------------------------------------------------------------------


class TestPostProcessing:
    def test_mismatch_corrected_response_closed_form(self):
        t0 = time.monotonic()
        freqs = np.linspace(50e9, 70e9, 11)
        s = np.zeros((11, 2, 2), complex)
        s[:, 0, 0] = 0.3 * np.exp(0.2j)
        s[:, 1, 1] = 0.2 * np.exp(-0.5j)
        s[:, 1, 0] = s[:, 0, 1] = 0.1 * np.exp(1.0j)
        sp = SParameterSet(freqs=freqs, s=s, z0=50.0)
        resp = channel_response(sp, (0, 1))
        oracle = 0.1**2 / ((1 - 0.3**2) * (1 - 0.2**2))
        assert np.max(np.abs(resp / oracle - 1.0)) <= 1e-9
        assert time.monotonic() - t0 < 1.0

    def test_regression_recovers_synthetic_exponent(self):
        """L = 17.8 log10(d) + C0 must come back as n = 1.78 exactly."""
        t0 = time.monotonic()
        c0 = -31.7
        d = np.array([0.8e-3, 1.3e-3, 2.9e-3, 5.0e-3, 8.4e-3, 12.0e-3])
        pairs = [(di, 17.8 * math.log10(di) + c0) for di in d]
        fit = fit_path_loss(pairs)
        assert abs(fit.n / 1.78 - 1.0) <= 1e-9
        assert abs(fit.c / c0 - 1.0) <= 1e-9
        assert fit.residual_rms <= 1e-9
        assert time.monotonic() - t0 < 1.0

    def test_regression_matches_hand_computed_least_squares(self):
        """Scattered data against the normal-equation solution written out
        longhand (sums only, no linear-algebra library)."""
        rng = np.random.default_rng(42)
        d = np.array([1e-3, 2e-3, 3e-3, 5e-3, 7e-3, 11e-3])
        L = 22.0 * np.log10(d) - 40.0 + rng.standard_normal(6)
        x = 10.0 * np.log10(d)
        sx, sy = x.sum(), L.sum()
        sxx, sxy = (x * x).sum(), (x * L).sum()
        m = len(d)
        n_hand = (m * sxy - sx * sy) / (m * sxx - sx * sx)
        c_hand = (sy - n_hand * sx) / m
        fit = fit_path_loss(list(zip(d, L)))
        assert abs(fit.n / n_hand - 1.0) <= 1e-9
        assert abs(fit.c / c_hand - 1.0) <= 1e-9


# --------------------------------------------------------------------------
# shared solver-backed fixtures (computed once, reused across criteria)
# --------------------------------------------------------------------------

_DESK_CACHE: dict = {}


def desk_tuned(preset: str, **overrides):
    """Tune the monopoles of a desk-scale preset, then run its full
    S-matrix; memoized so different criteria share configurations."""
    key = (preset, tuple(sorted((k, repr(v)) for k, v in overrides.items())))
    if key not in _DESK_CACHE:
        scen = desk_scenario(preset, **overrides)
        tuned = tune_monopole(scen, resolution=DESK_RESOLUTION)
        outcome = simulate_scenario(tuned.scenario, resolution=DESK_RESOLUTION)
        assert outcome.converged, f"{preset} {overrides}: run hit the step cap"
        _DESK_CACHE[key] = (tuned, outcome)
    return _DESK_CACHE[key]


@pytest.fixture(scope="module")
def vacuum_tuned():
    """Quarter-wave tuning oracle: one monopole over ground in vacuum."""
    return tune_monopole(vacuum_tuning_scenario(), resolution=60)


def s11_center_db(outcome):
    """Per-port reflection magnitude in dB at the band center."""
    sp = outcome.sparams
    lo, hi = outcome.report.band
    k = int(np.argmin(np.abs(sp.freqs - 0.5 * (lo + hi))))
    return [20 * math.log10(max(abs(sp.s[k, i, i]), 1e-30)) for i in range(sp.n_ports)]


# --------------------------------------------------------------------------
# 2/3. Path-loss oracles: open vacuum (n ~ 2) and parallel plate (n <= 1.5)
# --------------------------------------------------------------------------


@slow
class TestFreeSpaceOracle:
    def test_exponent_near_two(self, vacuum_tuned):
        t0 = time.monotonic()
        out = simulate_scenario(free_space_scenario(vacuum_tuned.length), resolution=15)
        assert out.converged
        assert out.report.fit is not None
        assert abs(out.report.fit.n - 2.0) <= 0.15, f"n = {out.report.fit.n:.3f}"
        assert time.monotonic() - t0 <= 30 * 60


@slow
class TestParallelPlateOracle:
    def test_guided_exponent_below_free_space(self, vacuum_tuned):
        t0 = time.monotonic()
        out = simulate_scenario(parallel_plate_scenario(vacuum_tuned.length), resolution=15)
        assert out.converged
        assert out.report.fit is not None
        assert out.report.fit.n <= 1.5, f"n = {out.report.fit.n:.3f}"
        assert time.monotonic() - t0 <= 30 * 60


# --------------------------------------------------------------------------
# 4. Solver invariants
# --------------------------------------------------------------------------


@slow
class TestSolverInvariants:
    def test_energy_drift_in_lossless_box(self):
        """Ripple-period-averaged energy drifts < 0.1% over 10^4 steps."""
        grid, scen = make_box()
        sim = Simulation(grid, scen, face_types=ALL_PEC)
        seed_cavity_mode(sim)

        def windowed(n=256):
            acc = 0.0
            for _ in range(n):
                sim.step(1)
                acc += sim.total_energy()
            return acc / n

        w0 = windowed()
        sim.step(10_000)
        assert abs(windowed() / w0 - 1.0) < 1e-3

    def test_passivity_in_lossy_box(self):
        """Total energy never grows in a conductive box.  Electric
        conductivity damps E only, so the run settles onto a tiny
        magnetostatic remnant (curl-free H that no longer drives E);
        there the energy is constant up to the float32 granularity of
        the stored fields (up to ~5e-8 relative, measured).  Strict
        decrease is asserted while the mode is alive and non-increase
        within a few float32 epsilons everywhere."""
        grid, scen = make_box(sigma=10.0)
        sim = Simulation(grid, scen, face_types=ALL_PEC)
        seed_cavity_mode(sim)
        e = [sim.total_energy()]
        for _ in range(20):
            sim.step(100)
            e.append(sim.total_energy())
        e = np.asarray(e)
        d = np.diff(e)
        assert np.all(d[:6] < 0), "no strict decay while the mode is alive"
        assert e[6] < 1e-10 * e[0], "mode failed to dissipate"
        tol = 8 * np.finfo(np.float32).eps
        assert np.all(d <= tol * e[:-1]), "energy grew beyond rounding"

    def test_linearity(self):
        grid, scen = make_box(n=12)
        a = Simulation(grid, scen, face_types=ALL_PEC)
        b = Simulation(grid, scen, face_types=ALL_PEC)
        a.set_initial_fields(seed=3, amplitude=1.0)
        b.set_initial_fields(seed=3, amplitude=2.0)
        a.step(400)
        b.step(400)
        for comp in ("Ex", "Ey", "Ez", "Hx", "Hy", "Hz"):
            fa = np.asarray(getattr(a.state, comp), dtype=np.float64)
            fb = np.asarray(getattr(b.state, comp), dtype=np.float64)
            scale = max(np.max(np.abs(fb)), 1e-30)
            assert np.max(np.abs(2.0 * fa - fb)) / scale <= 1e-12, comp

    def test_mirror_symmetry(self):
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
        sim.step(400)
        for arr, sign in ((st.Ez, 1.0), (st.Ey, 1.0), (st.Ex, -1.0)):
            a64 = np.asarray(arr, dtype=np.float64)
            scale = max(np.max(np.abs(a64)), 1e-30)
            assert np.max(np.abs(a64 - sign * a64[::-1])) / scale <= 1e-10

    def test_pml_reflection_vs_reference_domain(self):
        """A short pulse radiated in a small absorbing domain is compared
        with the same pulse in a reference domain large enough that its
        walls cannot answer within the window: the difference at a probe
        near the absorbing wall is the boundary reflection."""
        cell = 0.4e-3
        n_small, n_big = 40, 200
        off = (n_big - n_small) // 2  # small domain embedded centrally

        # short Gaussian-derivative pulse, ~10-cell spatial width: zero DC,
        # spectrum centered well inside the resolved range of the mesh
        tau = 10 * cell / C0

        def pulse(t, t0=6 * tau):
            u = (t - t0) / tau
            return -u * math.exp(0.5 - 0.5 * u * u)

        def probe_trace(n, faces, steps):
            grid, scen = make_box(n=n, cell=cell)
            sim = Simulation(grid, scen, face_types=faces)
            src = (n // 2,) * 3
            if n == n_big:  # same absolute geometry as the small domain
                src = tuple(c + off for c in (n_small // 2,) * 3)
            # state arrays are padded outward on absorbing faces: shift
            # interior indices so both domains drive/probe the same point
            pad = sim.pml.thickness_cells if faces["x-"] == "pml" else 0
            src = tuple(c + pad for c in src)
            prb = (src[0] - 15, src[1], src[2])
            trace = np.empty(steps)
            for step in range(steps):
                sim.state.Ez[src] += np.float32(pulse(sim.state.time))
                sim.step(1)
                trace[step] = sim.state.Ez[prb]
            return trace, sim.dt

        # window: direct pulse plus the small domain's wall echo fit inside;
        # the reference's nearest wall echo needs >= 2*off + 15 more cells
        grid, _ = make_box(n=4, cell=cell)
        steps = int(((2 * off - 15) * cell / C0) / grid.dt)
        small, _ = probe_trace(n_small, ALL_PML, steps)
        ref, _ = probe_trace(n_big, ALL_PEC, steps)
        reflection = np.max(np.abs(small - ref)) / np.max(np.abs(ref))
        assert 20 * math.log10(reflection) <= -40.0, f"{reflection:.2e}"

    def test_reciprocity_desk_package(self):
        """|S_ij - S_ji| stays within 1 dB across the band on the walled
        desk-scale package (9 monopoles, full matrix).

        The check needs a longer ring-down than the default policy: at
        the default 1e-5 cutoff the DFT of the truncated tail shows up
        as apparent non-reciprocity of a few dB at deep interference
        notches, and it keeps shrinking as the cutoff tightens (a
        signature of truncation noise, not of a non-reciprocal solver)."""
        t0 = time.monotonic()
        tuned, _ = desk_tuned("single_chip_walled")
        out = simulate_scenario(
            tuned.scenario,
            resolution=DESK_RESOLUTION,
            run_policy=RunPolicy(ring_down_threshold=1e-7),
        )
        assert out.converged
        sp = out.sparams
        lo, hi = out.report.band
        mask = (sp.freqs >= lo) & (sp.freqs <= hi)
        worst = 0.0
        for i in range(sp.n_ports):
            for j in range(i + 1, sp.n_ports):
                a = 20 * np.log10(np.maximum(np.abs(sp.s[mask, i, j]), 1e-30))
                b = 20 * np.log10(np.maximum(np.abs(sp.s[mask, j, i]), 1e-30))
                worst = max(worst, float(np.max(np.abs(a - b))))
        assert worst <= 1.0, f"worst reciprocity error {worst:.3f} dB"
        assert time.monotonic() - t0 <= 60 * 60


# --------------------------------------------------------------------------
# 5. Ports, tuning, and export fidelity
# --------------------------------------------------------------------------


@slow
class TestPortsAndTuning:
    def test_vacuum_monopole_tunes_to_quarter_wave(self, vacuum_tuned):
        frac = vacuum_tuned.length / LAMBDA0
        assert abs(frac - 0.24) <= 0.024, f"tuned to {frac:.3f} lambda"
        assert vacuum_tuned.s11_db <= -10.0

    @pytest.mark.parametrize(
        "preset", ["single_chip_walled", "single_chip_open", "interposer_2x2", "mcm_2x2"]
    )
    def test_every_desk_monopole_matched_after_tuning(self, preset):
        t0 = time.monotonic()
        _, out = desk_tuned(preset)
        refl = s11_center_db(out)
        assert max(refl) <= -10.0, f"{preset}: per-port S11 {refl}"
        assert time.monotonic() - t0 <= 30 * 60

    def test_touchstone_export_matches_golden_bytes(self, tmp_path):
        from pathlib import Path

        golden = Path(__file__).parent / "golden"
        s = np.load(golden / "two_port_s.npy")
        out = tmp_path / "two_port.s2p"
        write_touchstone(out, np.array([50e9, 60e9, 70e9]), s,
                         comments=["synthetic golden fixture"])
        assert out.read_bytes() == (golden / "two_port.s2p").read_bytes()

    def test_simulation_report_round_trips_through_analyze(self, tmp_path):
        """simulate writes a Touchstone file and a report; re-analyzing
        that Touchstone reproduces the report bit-for-bit."""
        from pkgwave.geometry import make_scenario
        from pkgwave.scenario_io import save_scenario

        scen = make_scenario(
            "single_chip_walled", chip_size=2e-3, wall_offset=1e-3,
            antennas_per_chip="2x2", interconnect_thickness=None,
            bump_thickness=150e-6,
        )
        scn = tmp_path / "case.scn"
        save_scenario(scen, scn)
        run_dir = tmp_path / "run"
        assert main(["simulate", "--scenario", str(scn), "--out", str(run_dir)]) == EXIT_OK
        re_dir = tmp_path / "re"
        rc = main([
            "analyze", "--touchstone", str(run_dir / "result.s4p"),
            "--positions", str(run_dir / "positions.csv"),
            "--out", str(re_dir), "--band", "50", "70",
        ])
        assert rc == EXIT_OK
        assert (run_dir / "report.json").read_bytes() == (re_dir / "report.json").read_bytes()


# --------------------------------------------------------------------------
# 6-10. Desk-scale physics trends
# --------------------------------------------------------------------------


@slow
class TestSiliconThinning:
    def test_thin_silicon_opens_the_channel(self):
        t0 = time.monotonic()
        s_min = {}
        for t_si in (0.1e-3, 0.25e-3, 0.4e-3, 0.55e-3, 0.7e-3):
            _, out = desk_tuned("single_chip_walled", silicon_thickness=t_si)
            s_min[t_si] = out.report.metrics.s_min_db
        assert s_min[0.1e-3] > s_min[0.7e-3]
        assert s_min[0.1e-3] - s_min[0.7e-3] >= 10.0, f"{s_min}"
        assert time.monotonic() - t0 <= 2 * 60 * 60


@slow
class TestHeatSpreader:
    def test_spreader_recovers_the_channel(self):
        t0 = time.monotonic()
        s_min = {}
        for t_sp in (0.0, 0.4e-3, 0.8e-3):
            _, out = desk_tuned("single_chip_walled", spreader_thickness=t_sp)
            s_min[t_sp] = out.report.metrics.s_min_db
        assert s_min[0.8e-3] - s_min[0.0] >= 5.0, f"{s_min}"
        assert time.monotonic() - t0 <= 90 * 60


@slow
class TestWallRemoval:
    def test_open_boundary_costs_the_cavity(self):
        """Identical chip, PEC walls vs absorbing open boundary: the open
        channel's worst pair must sit >= 8 dB lower.

        The walls matter in proportion to how many wall round-trips the
        cavity sustains, so the comparison chip is a low-loss build
        (0.05 mm silicon under a 1.2 mm spreader).  Each boundary gets
        its own monopole tuning, as every scenario in this suite does.
        The walled cavity rings far past the default step cap, hence
        the raised one; the cap would otherwise truncate tail energy
        and understate the walled worst pair."""
        t0 = time.monotonic()
        ov = dict(silicon_thickness=0.05e-3, spreader_thickness=1.2e-3)
        s_min = {}
        for preset, policy in (
            ("single_chip_walled", RunPolicy(max_steps=200_000)),
            ("single_chip_open", None),
        ):
            tuned = tune_monopole(desk_scenario(preset, **ov), resolution=DESK_RESOLUTION)
            out = simulate_scenario(
                tuned.scenario, resolution=DESK_RESOLUTION, run_policy=policy
            )
            assert out.converged, preset
            s_min[preset] = out.report.metrics.s_min_db
        gap = s_min["single_chip_walled"] - s_min["single_chip_open"]
        assert gap >= 8.0, f"{s_min}"
        assert time.monotonic() - t0 <= 60 * 60


@slow
class TestExponentOrdering:
    def test_topologies_order_by_decay_exponent(self):
        t0 = time.monotonic()
        n = {}
        cases = {
            "optimized": ("single_chip_walled", {"silicon_thickness": 0.1e-3}),
            "interposer": ("interposer_2x2", {}),
            "default": ("single_chip_walled", {}),
            "mcm": ("mcm_2x2", {}),
        }
        for label, (preset, ov) in cases.items():
            _, out = desk_tuned(preset, **ov)
            assert out.report.fit is not None, label
            n[label] = out.report.fit.n
        assert n["optimized"] < n["interposer"] < n["default"] < n["mcm"], f"{n}"
        assert n["mcm"] > 2.0, f"{n}"
        assert n["optimized"] < 1.5, f"{n}"
        assert time.monotonic() - t0 <= 4 * 60 * 60


@slow
class TestFrequencyTrend:
    def test_channel_holds_at_higher_carrier(self):
        t0 = time.monotonic()
        s_min = {}
        for fc in (60e9, 100e9):
            if fc == 60e9:  # the preset's default band: share the cache
                _, out = desk_tuned("single_chip_walled")
            else:
                band = Band(fc * 5 / 6, fc * 7 / 6, fc)
                _, out = desk_tuned("single_chip_walled", band=band)
            s_min[fc] = out.report.metrics.s_min_db
        assert s_min[100e9] <= s_min[60e9], f"{s_min}"
        assert time.monotonic() - t0 <= 60 * 60
