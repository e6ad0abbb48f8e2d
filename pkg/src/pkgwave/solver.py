"""Time-domain Maxwell solver on the Yee grid.

E/H leapfrog updates with semi-implicit conductive loss, PEC boundaries
and material regions, convolutional-PML absorbing boundaries, lumped
resistive ports at monopole feeds, and ring-down-terminated runs that
record voltage/current series at every port.

Fields are single precision; energy sums and the port series are
accumulated in double precision.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .constants import C0, EPS0, MU0
from .geometry import LayerRole, PackageScenario
from .mesh import YeeGrid
from .ports import PortRecord

F32 = np.float32


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class PmlConfig:
    thickness_cells: int = 8
    grading_order: int = 3
    target_reflection_db: float = -60.0

    def __post_init__(self):
        if self.thickness_cells < 8:
            raise ValueError("PML must be at least 8 cells thick")
        if self.target_reflection_db > -40.0:
            raise ValueError("PML target reflection must be <= -40 dB")


@dataclass(frozen=True)
class SourceWaveform:
    """Gaussian-modulated sinusoid: covers [fc - bw/2, fc + bw/2] with at
    least 10% of the peak spectral amplitude while staying 120 dB down at DC.
    """
    f_center: float
    bandwidth: float
    amplitude: float = 1.0
    delay: float | None = None  # s; default 4.5 envelope widths

    @property
    def tau(self) -> float:
        # exp(-(pi f tau)^2) spectral envelope: 0.12 of peak at the band edge
        return 1.45 / (math.pi * 0.5 * self.bandwidth)

    @property
    def t0(self) -> float:
        return 4.5 * self.tau if self.delay is None else self.delay

    @property
    def end_time(self) -> float:
        return self.t0 + 4.5 * self.tau

    def __call__(self, t: float) -> float:
        u = (t - self.t0) / self.tau
        return self.amplitude * math.sin(2 * math.pi * self.f_center * (t - self.t0)) * math.exp(-u * u)

    def spectrum_envelope(self, f: float) -> float:
        """Analytic magnitude of the spectrum relative to its peak."""
        down = math.exp(-((math.pi * (f - self.f_center) * self.tau) ** 2))
        up = math.exp(-((math.pi * (f + self.f_center) * self.tau) ** 2))
        return down + up

    def validate(self) -> None:
        lo = self.f_center - 0.5 * self.bandwidth
        hi = self.f_center + 0.5 * self.bandwidth
        if lo <= 0:
            raise ValueError("source band extends to DC")
        for f in (lo, hi):
            if self.spectrum_envelope(f) < 0.10:
                raise ValueError("source spectrum below 10% of peak at the band edge")
        if self.spectrum_envelope(0.0) > 1e-6:
            raise ValueError("source spectrum above 1e-6 of peak at DC")


@dataclass(frozen=True)
class RunPolicy:
    """Run until the port energy in the last window falls below
    ring_down_threshold of the peak window, or the step cap is hit."""
    ring_down_threshold: float = 1e-5
    window_periods: float = 20.0
    max_steps: int = 60_000

    def window_steps(self, f_center: float, dt: float) -> int:
        return max(1, int(round(self.window_periods / (f_center * dt))))


# looser policy for the inner loop of monopole tuning, where only the
# location of the S11 minimum matters
TUNING_POLICY = RunPolicy(ring_down_threshold=3e-4, window_periods=20.0, max_steps=25_000)


@dataclass
class FieldState:
    Ex: np.ndarray
    Ey: np.ndarray
    Ez: np.ndarray
    Hx: np.ndarray
    Hy: np.ndarray
    Hz: np.ndarray
    step_index: int = 0
    time: float = 0.0


@dataclass
class RunResult:
    ports: list[PortRecord]
    converged: bool
    steps: int
    wall_time_s: float
    cells_per_second: float
    probes: dict[str, np.ndarray] = field(default_factory=dict)
    settings: dict = field(default_factory=dict)


@dataclass(frozen=True)
class _Port:
    port_id: int
    ijk: tuple[int, int, int]  # Ez index of the feed gap (padded grid)
    excited: bool


def _edge_average(vol: np.ndarray, axes: tuple[int, int]) -> np.ndarray:
    """Average a cell-centered volume onto the edges tangential to the
    remaining axis: 4-cell arithmetic mean, edge-replicated at faces."""
    pad = [(0, 0)] * 3
    for a in axes:
        pad[a] = (1, 1)
    p = np.pad(vol, pad, mode="edge")
    a, b = axes
    out = p
    sl0 = [slice(None)] * 3
    sl1 = [slice(None)] * 3
    sl0[a], sl1[a] = slice(None, -1), slice(1, None)
    out = 0.5 * (out[tuple(sl0)] + out[tuple(sl1)])
    sl0 = [slice(None)] * 3
    sl1 = [slice(None)] * 3
    sl0[b], sl1[b] = slice(None, -1), slice(1, None)
    return 0.5 * (out[tuple(sl0)] + out[tuple(sl1)])


def _edge_any_pec(pec: np.ndarray, axes: tuple[int, int]) -> np.ndarray:
    pad = [(0, 0)] * 3
    for a in axes:
        pad[a] = (1, 1)
    p = np.pad(pec, pad, mode="constant", constant_values=False)
    a, b = axes
    out = p
    sl0 = [slice(None)] * 3
    sl1 = [slice(None)] * 3
    sl0[a], sl1[a] = slice(None, -1), slice(1, None)
    out = out[tuple(sl0)] | out[tuple(sl1)]
    sl0 = [slice(None)] * 3
    sl1 = [slice(None)] * 3
    sl0[b], sl1[b] = slice(None, -1), slice(1, None)
    return out[tuple(sl0)] | out[tuple(sl1)]


def _pml_profiles(positions: np.ndarray, inner_lo: float, inner_hi: float,
                  depth_lo: float, depth_hi: float, dt: float, order: int,
                  reflection_db: float, alpha_max: float = 0.05):
    """(b, c) recursion coefficients at the given positions; zero outside
    the two PML slabs."""
    b = np.zeros(len(positions))
    c = np.zeros(len(positions))
    r0 = 10.0 ** (reflection_db / 20.0)
    for side, inner, depth in (("lo", inner_lo, depth_lo), ("hi", inner_hi, depth_hi)):
        if depth <= 0:
            continue
        smax = -(order + 1) * math.log(r0) * EPS0 * C0 / (2.0 * depth)
        if side == "lo":
            w = (inner - positions) / depth
        else:
            w = (positions - inner) / depth
        mask = w > 1e-12
        wv = np.clip(w[mask], 0.0, 1.0)
        sig = smax * wv**order
        alpha = alpha_max * (1.0 - wv)
        bb = np.exp(-(sig + alpha) * dt / EPS0)
        cc = sig * (bb - 1.0) / (sig + alpha)
        b[mask] = bb
        c[mask] = cc
    return b, c


class Simulation:
    """One FDTD run over a meshed scenario with at most one excited port.

    The grid is padded with PML cells on absorbing faces (materials
    replicated outward, spacing continued uniformly), so the physical
    domain handed in by the mesh module is untouched.
    """

    def __init__(
        self,
        grid: YeeGrid,
        scenario: PackageScenario,
        excited_port: int | None = None,
        pml: PmlConfig = PmlConfig(),
        waveform: SourceWaveform | None = None,
        face_types: dict[str, str] | None = None,
    ):
        self.grid = grid
        self.scenario = scenario
        self.pml = pml
        self.dt = grid.dt
        band = scenario.band
        self.waveform = waveform or SourceWaveform(band.f_center, band.f_max - band.f_min)
        self.waveform.validate()

        faces = self._face_types(face_types)
        self.face_types = faces
        npml = pml.thickness_cells
        pad = {f: (npml if faces[f] == "pml" else 0) for f in faces}
        self._pad = pad

        # padded geometry
        ex, ey, ez = grid.edges_x, grid.edges_y, grid.edges_z
        self.edges_x = _extend_edges(ex, pad["x-"], pad["x+"])
        self.edges_y = _extend_edges(ey, pad["y-"], pad["y+"])
        self.edges_z = _extend_edges(ez, pad["z-"], pad["z+"])
        self.nx = len(self.edges_x) - 1
        self.ny = len(self.edges_y) - 1
        self.nz = len(self.edges_z) - 1

        mat = np.pad(
            grid.material_index,
            ((pad["x-"], pad["x+"]), (pad["y-"], pad["y+"]), (pad["z-"], pad["z+"])),
            mode="edge",
        )
        t = grid.materials
        eps_cell = t.eps_r[mat]
        sig_cell = t.sigma[mat]
        pec_cell = t.is_pec[mat]

        self._build_lengths()
        self._build_coefficients(eps_cell, sig_cell, pec_cell, faces)
        self._build_ports(excited_port)
        self._build_pml(faces)
        self._alloc_fields()

        self.probe_requests: list[tuple[str, str, tuple[int, int, int]]] = []
        self._eps_edges = None  # retained lazily for energy sums

    # ------------------------------------------------------------------
    def _face_types(self, override):
        if override is not None:
            faces = dict(override)
            for f in ("x-", "x+", "y-", "y+", "z-", "z+"):
                faces.setdefault(f, "pec")
            return faces
        s = self.scenario
        lateral = "pml" if s.lateral_boundary.kind == "absorbing_open" else "pec"
        top = "pml" if (lateral == "pml" and s.stack[-1].role == LayerRole.VACUUM_GAP) else "pec"
        return {"x-": lateral, "x+": lateral, "y-": lateral, "y+": lateral, "z-": "pec", "z+": top}

    def _build_lengths(self):
        dx = np.diff(self.edges_x)
        dy = np.diff(self.edges_y)
        dz = np.diff(self.edges_z)
        self.dx, self.dy, self.dz = dx, dy, dz
        self.ivx = (1.0 / dx).astype(F32)
        self.ivy = (1.0 / dy).astype(F32)
        self.ivz = (1.0 / dz).astype(F32)

        def dual(d):
            dd = np.empty(len(d) + 1)
            dd[1:-1] = 0.5 * (d[:-1] + d[1:])
            dd[0] = 0.5 * d[0]
            dd[-1] = 0.5 * d[-1]
            return dd

        self.dx_dual = dual(dx)
        self.dy_dual = dual(dy)
        self.dz_dual = dual(dz)
        self.ivxd = (1.0 / self.dx_dual).astype(F32)
        self.ivyd = (1.0 / self.dy_dual).astype(F32)
        self.ivzd = (1.0 / self.dz_dual).astype(F32)

    def _build_coefficients(self, eps_cell, sig_cell, pec_cell, faces):
        dt = self.dt
        self._coef = {}
        for comp, axes in (("x", (1, 2)), ("y", (0, 2)), ("z", (0, 1))):
            eps = _edge_average(eps_cell, axes) * EPS0
            sig = _edge_average(sig_cell, axes)
            pec = _edge_any_pec(pec_cell, axes)
            loss = sig * dt / (2.0 * eps)
            ca = (1.0 - loss) / (1.0 + loss)
            cb = (dt / eps) / (1.0 + loss)
            ca[pec] = 0.0
            cb[pec] = 0.0
            self._coef[comp] = (ca, cb, eps)

        # PEC faces: zero the tangential components on the face
        def kill(comp, sl):
            ca, cb, eps = self._coef[comp]
            ca[sl] = 0.0
            cb[sl] = 0.0

        if faces["x-"] == "pec":
            kill("y", (0, slice(None), slice(None)))
            kill("z", (0, slice(None), slice(None)))
        if faces["x+"] == "pec":
            kill("y", (-1, slice(None), slice(None)))
            kill("z", (-1, slice(None), slice(None)))
        if faces["y-"] == "pec":
            kill("x", (slice(None), 0, slice(None)))
            kill("z", (slice(None), 0, slice(None)))
        if faces["y+"] == "pec":
            kill("x", (slice(None), -1, slice(None)))
            kill("z", (slice(None), -1, slice(None)))
        if faces["z-"] == "pec":
            kill("x", (slice(None), slice(None), 0))
            kill("y", (slice(None), slice(None), 0))
        if faces["z+"] == "pec":
            kill("x", (slice(None), slice(None), -1))
            kill("y", (slice(None), slice(None), -1))

        # PML-backed faces are PEC-terminated as well
        for f in faces:
            if faces[f] == "pml":
                ax = {"x": 0, "y": 1, "z": 2}[f[0]]
                lo = f[1] == "-"
                idx = 0 if lo else -1
                for comp in "xyz":
                    if comp == f[0]:
                        continue
                    sl = [slice(None)] * 3
                    sl[ax] = idx
                    kill(comp, tuple(sl))

        self.ch = F32(dt / MU0)

    def _build_ports(self, excited_port):
        s = self.scenario
        grid = self.grid
        pad = self._pad
        self.ports: list[_Port] = []
        feeds = s.antenna_feed_points() if s.chips else []
        if not feeds:
            self._port_ijk = np.zeros((0, 3), dtype=np.int64)
            self._port_csrc = np.zeros(0, dtype=F32)
            self._port_dzgap = np.zeros(0)
            self._port_dxd = np.zeros(0)
            self._port_dyd = np.zeros(0)
            self._excited = None
            return
        if excited_port is not None and not (0 <= excited_port < len(feeds)):
            raise SolverError(f"excited port {excited_port} out of range (n={len(feeds)})")

        ground_z = s.bump_sheet_top()
        k_gap = grid.nearest_node(2, ground_z) + pad["z-"]
        caz, cbz, epsz = self._coef["z"]

        ijk = []
        csrc = []
        dzgap = []
        dxd = []
        dyd = []
        # the length is the antenna's full height above the ground plane;
        # the one-cell excitation gap at its base is part of that height
        z_top = self.edges_z[k_gap] + s.monopole.length
        k_top = int(np.argmin(np.abs(self.edges_z - z_top)))
        if k_top <= k_gap + 1:
            raise SolverError(
                "monopole length "
                f"{s.monopole.length:.3g} m does not clear the feed-gap cell "
                f"({self.dz[k_gap]:.3g} m): refine the mesh or lengthen the antenna"
            )
        for pid, (ax, ay, _) in enumerate(feeds):
            i = grid.nearest_node(0, ax) + pad["x-"]
            j = grid.nearest_node(1, ay) + pad["y-"]
            # monopole metal above the feed gap
            caz[i, j, k_gap + 1 : k_top] = 0.0
            cbz[i, j, k_gap + 1 : k_top] = 0.0
            # resistive voltage-source port in the gap cell
            dz_gap = self.dz[k_gap]
            area = self.dx_dual[i] * self.dy_dual[j]
            eps = epsz[i, j, k_gap]
            ijk.append((i, j, k_gap))
            dzgap.append(dz_gap)
            dxd.append(self.dx_dual[i])
            dyd.append(self.dy_dual[j])
            beta = self.dt * dz_gap / (2.0 * s.port_impedance * area * eps)
            # recover the medium loss term from the unmodified coefficients
            loss = (1.0 - caz[i, j, k_gap]) / (1.0 + caz[i, j, k_gap]) if caz[i, j, k_gap] != 0 else 0.0
            den = 1.0 + loss + beta
            caz[i, j, k_gap] = (1.0 - loss - beta) / den
            cbz[i, j, k_gap] = (self.dt / eps) / den
            csrc.append(-self.dt / (eps * s.port_impedance * area * den))
            self.ports.append(_Port(pid, (i, j, k_gap), excited_port == pid))

        self.k_gap = k_gap
        self.k_top = k_top
        self._port_ijk = np.array(ijk, dtype=np.int64)
        self._port_csrc = np.array(csrc, dtype=F32)
        self._port_dzgap = np.array(dzgap, dtype=F32)
        self._port_dxd = np.array(dxd, dtype=F32)
        self._port_dyd = np.array(dyd, dtype=F32)
        self._excited = excited_port

    def _build_pml(self, faces):
        dt = self.dt
        cfg = self.pml
        prof = {}
        for axis, edges in (("x", self.edges_x), ("y", self.edges_y), ("z", self.edges_z)):
            n_lo = self._pad[f"{axis}-"]
            n_hi = self._pad[f"{axis}+"]
            inner_lo = edges[n_lo]
            inner_hi = edges[len(edges) - 1 - n_hi]
            depth_lo = inner_lo - edges[0] if n_lo else 0.0
            depth_hi = edges[-1] - inner_hi if n_hi else 0.0
            centers = 0.5 * (edges[:-1] + edges[1:])
            be, ce = _pml_profiles(edges, inner_lo, inner_hi, depth_lo, depth_hi,
                                   dt, cfg.grading_order, cfg.target_reflection_db)
            bh, chp = _pml_profiles(centers, inner_lo, inner_hi, depth_lo, depth_hi,
                                    dt, cfg.grading_order, cfg.target_reflection_db)
            prof[axis] = (be.astype(F32), ce.astype(F32), bh.astype(F32), chp.astype(F32))
        self._prof = prof
        self._has_pml = any(v == "pml" for v in faces.values())

    def _alloc_fields(self):
        nx, ny, nz = self.nx, self.ny, self.nz
        z = lambda shape: np.zeros(shape, dtype=F32)
        self.state = FieldState(
            Ex=z((nx, ny + 1, nz + 1)),
            Ey=z((nx + 1, ny, nz + 1)),
            Ez=z((nx + 1, ny + 1, nz)),
            Hx=z((nx + 1, ny + 2, nz + 2)),
            Hy=z((nx + 2, ny + 1, nz + 2)),
            Hz=z((nx + 2, ny + 2, nz + 1)),
        )
        if self._has_pml:
            self._psi_e = [
                z((nx, ny + 1, nz + 1)), z((nx, ny + 1, nz + 1)),
                z((nx + 1, ny, nz + 1)), z((nx + 1, ny, nz + 1)),
                z((nx + 1, ny + 1, nz)), z((nx + 1, ny + 1, nz)),
            ]
            self._psi_h = [
                z((nx + 1, ny, nz)), z((nx + 1, ny, nz)),
                z((nx, ny + 1, nz)), z((nx, ny + 1, nz)),
                z((nx, ny, nz + 1)), z((nx, ny, nz + 1)),
            ]
        self._ca = tuple(self._coef[c][0].astype(F32) for c in "xyz")
        self._cb = tuple(self._coef[c][1].astype(F32) for c in "xyz")

    # ------------------------------------------------------------------
    def add_probe(self, name: str, component: str, ijk: tuple[int, int, int]):
        """Record a raw field component at a padded-grid index every step."""
        if component not in ("Ex", "Ey", "Ez", "Hx", "Hy", "Hz"):
            raise ValueError(f"unknown component {component}")
        self.probe_requests.append((name, component, tuple(ijk)))

    def set_initial_fields(self, seed: int, amplitude: float = 1.0):
        """Random interior initial E field (tests of passivity/decay)."""
        rng = np.random.default_rng(seed)
        st = self.state
        for arr, (ca, cb) in zip((st.Ex, st.Ey, st.Ez), zip(self._ca, self._cb)):
            noise = rng.standard_normal(arr.shape).astype(F32) * F32(amplitude)
            noise[cb == 0] = 0.0  # keep PEC edges exactly zero
            arr[...] = noise

    def step(self, n_steps: int = 1, record=None):
        """Advance the leapfrog by n_steps.  `record` is the internal
        per-step recording callback used by run()."""
        st = self.state
        ca, cb = self._ca, self._cb
        vs = np.zeros(len(self.ports), dtype=F32)
        v_out = np.zeros(len(self.ports))
        i_out = np.zeros(len(self.ports))
        for _ in range(n_steps):
            t_half = st.time + 0.5 * self.dt
            kernels.update_e(
                st.Ex, st.Ey, st.Ez, st.Hx, st.Hy, st.Hz,
                ca[0], cb[0], ca[1], cb[1], ca[2], cb[2],
                self.ivxd, self.ivyd, self.ivzd,
            )
            if self._has_pml:
                px, py, pz = self._prof["x"], self._prof["y"], self._prof["z"]
                kernels.cpml_e(
                    st.Ex, st.Ey, st.Ez, st.Hx, st.Hy, st.Hz,
                    cb[0], cb[1], cb[2],
                    self.ivxd, self.ivyd, self.ivzd,
                    px[0], px[1], py[0], py[1], pz[0], pz[1],
                    *self._psi_e,
                )
            if len(self.ports):
                if self._excited is not None:
                    vs[self._excited] = F32(self.waveform(t_half))
                kernels.inject_and_measure_v(
                    st.Ez, self._port_ijk, self._port_csrc, vs, self._port_dzgap, v_out
                )
            kernels.update_h(
                st.Ex, st.Ey, st.Ez, st.Hx, st.Hy, st.Hz,
                self.ch, self.ivx, self.ivy, self.ivz,
            )
            if self._has_pml:
                kernels.cpml_h(
                    st.Ex, st.Ey, st.Ez, st.Hx, st.Hy, st.Hz,
                    self.ch, self.ivx, self.ivy, self.ivz,
                    px[2], px[3], py[2], py[3], pz[2], pz[3],
                    *self._psi_h,
                )
            if len(self.ports):
                kernels.measure_i(st.Hx, st.Hy, self._port_ijk, self._port_dxd, self._port_dyd, i_out)
            st.step_index += 1
            st.time += self.dt
            if record is not None:
                record(v_out, i_out)

    def run(self, policy: RunPolicy = RunPolicy()) -> RunResult:
        """Run to ring-down (or the step cap) and return the port series."""
        st = self.state
        n_ports = len(self.ports)
        v_series = [[] for _ in range(n_ports)]
        i_series = [[] for _ in range(n_ports)]
        probes = {name: [] for name, _, _ in self.probe_requests}
        z0 = self.scenario.port_impedance

        window = policy.window_steps(self.scenario.band.f_center, self.dt)
        min_time = self.waveform.end_time + 2.0 * self._domain_crossing_time()
        min_steps = int(math.ceil(min_time / self.dt))

        peak_window = 0.0
        acc_window = 0.0
        converged = False
        t_start = time.perf_counter()

        def record(v_out, i_out):
            nonlocal acc_window
            for p in range(n_ports):
                v_series[p].append(v_out[p])
                i_series[p].append(i_out[p])
                acc_window += v_out[p] * v_out[p] / z0 + i_out[p] * i_out[p] * z0
            for name, comp, ijk in self.probe_requests:
                probes[name].append(float(getattr(st, comp)[ijk]))

        while st.step_index < policy.max_steps:
            self.step(1, record=record)
            n = st.step_index
            if n % window == 0:
                if acc_window > peak_window:
                    peak_window = acc_window
                if (
                    n >= min_steps
                    and peak_window > 0
                    and acc_window < policy.ring_down_threshold * peak_window
                ):
                    converged = True
                    acc_window = 0.0
                    break
                acc_window = 0.0
            if n % 512 == 0 and not np.isfinite(st.Ez).all():
                bad = np.argwhere(~np.isfinite(st.Ez))[0]
                raise SolverError(
                    f"non-finite field at step {n}, Ez cell {tuple(int(b) for b in bad)}"
                )

        wall = time.perf_counter() - t_start
        if n_ports and not np.isfinite(np.asarray(v_series)).all():
            raise SolverError("non-finite port record")
        records = [
            PortRecord(
                port_id=p,
                v=np.asarray(v_series[p]),
                i=np.asarray(i_series[p]),
                dt=self.dt,
                excited=(p == self._excited),
                v_t0=self.dt,
                i_t0=1.5 * self.dt,
            )
            for p in range(n_ports)
        ]
        steps = st.step_index
        cells = self.nx * self.ny * self.nz
        return RunResult(
            ports=records,
            converged=converged if n_ports else True,
            steps=steps,
            wall_time_s=wall,
            cells_per_second=cells * steps / wall if wall > 0 else 0.0,
            probes={k: np.asarray(v) for k, v in probes.items()},
            settings=self.settings_summary(),
        )

    def _domain_crossing_time(self) -> float:
        lx = self.edges_x[-1] - self.edges_x[0]
        ly = self.edges_y[-1] - self.edges_y[0]
        lz = self.edges_z[-1] - self.edges_z[0]
        diag = math.sqrt(lx * lx + ly * ly + lz * lz)
        return diag * math.sqrt(self.scenario.max_permittivity()) / C0

    def settings_summary(self) -> dict:
        return {
            "dt_s": self.dt,
            "padded_shape": [self.nx, self.ny, self.nz],
            "pml_cells": self.pml.thickness_cells,
            "pml_target_db": self.pml.target_reflection_db,
            "faces": self.face_types,
            "excited_port": self._excited,
            "source_f_center_hz": self.waveform.f_center,
            "source_bandwidth_hz": self.waveform.bandwidth,
        }

    # ------------------------------------------------------------------
    def total_energy(self) -> float:
        """Discrete EM field energy, double-precision accumulation."""
        st = self.state
        e_parts = (
            (st.Ex, self._coef["x"][2], self.dx, self.dy_dual, self.dz_dual),
            (st.Ey, self._coef["y"][2], self.dx_dual, self.dy, self.dz_dual),
            (st.Ez, self._coef["z"][2], self.dx_dual, self.dy_dual, self.dz),
        )
        total = 0.0
        for arr, eps, wx, wy, wz in e_parts:
            a = arr.astype(np.float64)
            total += 0.5 * np.einsum("ijk,ijk,i,j,k->", eps, a * a, wx, wy, wz)
        h_parts = (
            (st.Hx[:, 1:-1, 1:-1], self.dx_dual, self.dy, self.dz),
            (st.Hy[1:-1, :, 1:-1], self.dx, self.dy_dual, self.dz),
            (st.Hz[1:-1, 1:-1, :], self.dx, self.dy, self.dz_dual),
        )
        for arr, wx, wy, wz in h_parts:
            a = arr.astype(np.float64)
            total += 0.5 * MU0 * np.einsum("ijk,i,j,k->", a * a, wx, wy, wz)
        return float(total)

    def field_magnitude_slice(self, axis: int, coord: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """|E| interpolated to cell centers on the plane axis=coord.

        Returns (coords_a, coords_b, |E| 2D array) over the two remaining
        axes, in axis order.
        """
        edges = (self.edges_x, self.edges_y, self.edges_z)[axis]
        if not (edges[0] <= coord <= edges[-1]):
            raise ValueError(f"plane {coord} outside domain [{edges[0]}, {edges[-1]}]")
        centers = [0.5 * (e[:-1] + e[1:]) for e in (self.edges_x, self.edges_y, self.edges_z)]
        idx = int(np.argmin(np.abs(centers[axis] - coord)))
        st = self.state
        exc = 0.25 * (
            st.Ex[:, :-1, :-1] + st.Ex[:, 1:, :-1] + st.Ex[:, :-1, 1:] + st.Ex[:, 1:, 1:]
        )
        eyc = 0.25 * (
            st.Ey[:-1, :, :-1] + st.Ey[1:, :, :-1] + st.Ey[:-1, :, 1:] + st.Ey[1:, :, 1:]
        )
        ezc = 0.25 * (
            st.Ez[:-1, :-1, :] + st.Ez[1:, :-1, :] + st.Ez[:-1, 1:, :] + st.Ez[1:, 1:, :]
        )
        mag = np.sqrt(
            exc.astype(np.float64) ** 2 + eyc.astype(np.float64) ** 2 + ezc.astype(np.float64) ** 2
        )
        sl = [slice(None)] * 3
        sl[axis] = idx
        others = [a for a in range(3) if a != axis]
        return centers[others[0]], centers[others[1]], mag[tuple(sl)]


def record_field_slice(sim: Simulation, axis: int, coord: float) -> np.ndarray:
    """2D array of |E| at cell centers on the requested plane."""
    return sim.field_magnitude_slice(axis, coord)[2]


def export_field_slice(sim: Simulation, axis: int, coord: float, csv_path) -> None:
    """CSV export (coord_a, coord_b, e_magnitude) of a field slice."""
    ca, cbv, mag = sim.field_magnitude_slice(axis, coord)
    with open(csv_path, "w") as f:
        names = [n for i, n in enumerate("xyz") if i != axis]
        f.write(f"{names[0]}_m,{names[1]}_m,e_mag_v_per_m\n")
        for ia, a in enumerate(ca):
            for ib, b in enumerate(cbv):
                f.write(f"{float(a)!r},{float(b)!r},{float(mag[ia, ib])!r}\n")


def _extend_edges(edges: np.ndarray, n_lo: int, n_hi: int) -> np.ndarray:
    if n_lo == 0 and n_hi == 0:
        return edges.copy()
    d_lo = edges[1] - edges[0]
    d_hi = edges[-1] - edges[-2]
    lo = edges[0] - d_lo * np.arange(n_lo, 0, -1)
    hi = edges[-1] + d_hi * np.arange(1, n_hi + 1)
    return np.concatenate([lo, edges, hi])
