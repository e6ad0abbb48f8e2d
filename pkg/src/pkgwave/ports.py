"""Lumped-port bookkeeping: time series, wave DFTs, S-parameters,
and golden-section tuning of the monopole length."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import PackageScenario, with_monopole_length

DB_FLOOR = -120.0
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class PortRecord:
    """Voltage/current history at one port for one excitation run.

    Samples are uniform in time but V and I live on staggered time grids;
    v_t0 and i_t0 are the absolute times of the first samples.
    """
    port_id: int
    v: np.ndarray
    i: np.ndarray
    dt: float
    excited: bool
    v_t0: float
    i_t0: float

    def spectra(self, freqs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Continuous-time Fourier transforms of V(t) and I(t), evaluated
        at the exact (staggered) sample instants."""
        f = np.asarray(freqs, dtype=float)
        n = np.arange(len(self.v))
        tv = self.v_t0 + n * self.dt
        ti = self.i_t0 + n * self.dt
        kv = np.exp(-2j * np.pi * np.outer(f, tv))
        ki = np.exp(-2j * np.pi * np.outer(f, ti))
        vf = kv @ self.v.astype(np.float64) * self.dt
        if_ = ki @ self.i.astype(np.float64) * self.dt
        return vf, if_

    def waves(self, freqs: np.ndarray, z0: float) -> tuple[np.ndarray, np.ndarray]:
        """Incident and reflected pseudo-waves a(f), b(f) w.r.t. z0."""
        vf, if_ = self.spectra(freqs)
        rz = math.sqrt(z0)
        a = (vf + z0 * if_) / (2.0 * rz)
        b = (vf - z0 * if_) / (2.0 * rz)
        return a, b


@dataclass
class SParameterSet:
    """Scattering matrix sampled on a frequency grid (s[f, i, j])."""
    freqs: np.ndarray
    s: np.ndarray
    z0: float
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.freqs = np.asarray(self.freqs, dtype=float)
        self.s = np.asarray(self.s, dtype=complex)
        nf = len(self.freqs)
        if self.s.shape[0] != nf or self.s.shape[1] != self.s.shape[2]:
            raise ValueError(f"S array shape {self.s.shape} does not match {nf} frequencies")

    @property
    def n_ports(self) -> int:
        return self.s.shape[1]

    def magnitude(self, i: int, j: int) -> np.ndarray:
        return np.abs(self.s[:, i, j])

    def db(self, i: int, j: int) -> np.ndarray:
        mag = self.magnitude(i, j)
        return np.maximum(20.0 * np.log10(np.maximum(mag, 1e-300)), DB_FLOOR)

    def at(self, f: float) -> np.ndarray:
        """S matrix at the grid frequency nearest f."""
        return self.s[int(np.argmin(np.abs(self.freqs - f)))]

    def band_mask(self, f_min: float, f_max: float) -> np.ndarray:
        return (self.freqs >= f_min) & (self.freqs <= f_max)


def default_frequencies(f_min: float, f_max: float, n: int = 201) -> np.ndarray:
    if n < 201:
        raise ValueError("use at least 201 frequency points")
    return np.linspace(f_min, f_max, n)


def extract_sparams(
    records_by_excitation: dict[int, list[PortRecord]],
    freqs: np.ndarray,
    z0: float,
) -> SParameterSet:
    """Build the S matrix from per-excitation port histories.

    records_by_excitation maps the excited port index j to the records of
    every port for that run; column j of S is b_i / a_j.
    """
    freqs = np.asarray(freqs, dtype=float)
    ports = sorted(records_by_excitation)
    n = len(ports)
    if ports != list(range(n)):
        raise ValueError(f"excitations must cover ports 0..{n - 1}, got {ports}")
    s = np.zeros((len(freqs), n, n), dtype=complex)
    for j in ports:
        records = sorted(records_by_excitation[j], key=lambda r: r.port_id)
        if [r.port_id for r in records] != list(range(n)):
            raise ValueError(f"excitation {j} is missing port records")
        a_j, _ = records[j].waves(freqs, z0)
        if np.any(np.abs(a_j) == 0.0):
            raise ValueError("incident wave vanishes at a requested frequency")
        for i in range(n):
            _, b_i = records[i].waves(freqs, z0)
            s[:, i, j] = b_i / a_j
    return SParameterSet(freqs=freqs, s=s, z0=z0)


def return_loss_curve(record: PortRecord, freqs: np.ndarray, z0: float) -> np.ndarray:
    """|S11| in dB (clamped at the noise floor) from a single excited-port
    record."""
    a, b = record.waves(freqs, z0)
    mag = np.abs(b) / np.abs(a)
    return np.maximum(20.0 * np.log10(np.maximum(mag, 1e-300)), DB_FLOOR)


@dataclass
class TuneResult:
    length: float
    s11_db: float
    iterations: int
    evaluations: list[tuple[float, float]]
    scenario: PackageScenario


def tune_monopole(
    scenario: PackageScenario,
    resolution: int = 10,
    bracket: tuple[float, float] = (0.1, 1.0),
    max_iterations: int = 24,
    run_policy=None,
    objective=None,
) -> TuneResult:
    """Golden-section search for the monopole length that minimizes
    |S11| at the band center.

    The bracket is expressed as fractions of the available headroom under
    the cavity ceiling.  The search stops when the bracket shrinks below
    one vertical grid cell, since shorter moves cannot change the
    rasterized antenna.  `objective` (length -> |S11(f_center)| in dB) is
    injectable for tests; the default meshes and runs the solver.
    """
    from .mesh import generate_mesh
    from .solver import TUNING_POLICY, Simulation

    policy = run_policy or TUNING_POLICY
    headroom = scenario.spreader_ceiling() - scenario.bump_sheet_top()
    if headroom <= 0:
        raise ValueError("no headroom above the ground plane for a monopole")
    lo = bracket[0] * headroom
    hi = bracket[1] * headroom
    fc = scenario.band.f_center

    if objective is None:
        def objective(length: float) -> float:
            scen = with_monopole_length(scenario, length)
            grid = generate_mesh(scen, resolution=resolution)
            sim = Simulation(grid, scen, excited_port=0)
            result = sim.run(policy)
            rl = return_loss_curve(result.ports[0], np.array([fc]), scen.port_impedance)
            return float(rl[0])

        probe = generate_mesh(with_monopole_length(scenario, 0.5 * (lo + hi)), resolution=resolution)
        k0 = probe.nearest_node(2, scenario.bump_sheet_top())
        cell_tol = float(np.diff(probe.edges_z)[min(k0 + 1, probe.shape[2] - 1)])
        # a candidate must clear the feed-gap cell plus at least one metal cell
        lo = min(max(lo, 2.0 * cell_tol), hi)
        if hi < 2.0 * cell_tol * (1.0 - 1e-9):
            raise ValueError(
                "no room to tune: the headroom above the ground plane is "
                "under two grid cells at this resolution"
            )
    else:
        cell_tol = (hi - lo) * 0.5 ** max_iterations

    evals: list[tuple[float, float]] = []

    def f(length: float) -> float:
        val = objective(length)
        evals.append((length, val))
        return val

    if hi - lo <= cell_tol:
        # degenerate bracket (headroom of only a couple of cells): the
        # single admissible length is the ceiling itself
        val = f(hi)
        return TuneResult(
            length=hi,
            s11_db=val,
            iterations=0,
            evaluations=evals,
            scenario=with_monopole_length(scenario, hi),
        )

    x1 = hi - GOLDEN * (hi - lo)
    x2 = lo + GOLDEN * (hi - lo)
    f1, f2 = f(x1), f(x2)
    iterations = 0
    while hi - lo > cell_tol and iterations < max_iterations:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - GOLDEN * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + GOLDEN * (hi - lo)
            f2 = f(x2)
        iterations += 1

    best_len, best_val = min(evals, key=lambda e: e[1])
    return TuneResult(
        length=best_len,
        s11_db=best_val,
        iterations=iterations,
        evaluations=evals,
        scenario=with_monopole_length(scenario, best_len),
    )
